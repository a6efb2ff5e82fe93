use super::EvalSuite;

pub const TABLE_COLUMNS: [&str; 6] = ["SNo", "Usecase", "F1", "P", "R", "S-Bert Score"];

/// Aligned plain-text table, scores rounded to two decimals.
pub fn render_table(suite: &EvalSuite) -> String {
    let mut rows: Vec<[String; 6]> = Vec::with_capacity(suite.rows.len());
    for row in &suite.rows {
        let cells = match &row.result {
            Some(r) => [
                r.bertscore_f1,
                r.bertscore_precision,
                r.bertscore_recall,
                r.sbert_cosine,
            ]
            .map(|v| format!("{v:.2}")),
            None => std::array::from_fn(|_| "failed".to_string()),
        };
        let [f1, p, r, s] = cells;
        rows.push([row.sno.to_string(), row.usecase.clone(), f1, p, r, s]);
    }
    let mut widths = TABLE_COLUMNS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String; 6]| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 1 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        format!("| {} |", parts.join(" | "))
    };
    let mut out = String::new();
    out.push_str(&line(&TABLE_COLUMNS.map(str::to_string)));
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    for row in &rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Splits a rendered table back into header and body cells.
pub fn parse_table(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| l.starts_with('|') && !l.starts_with("|-"))
        .map(|l| {
            l.trim()
                .trim_matches('|')
                .split('|')
                .map(|c| c.trim().to_string())
                .collect()
        })
        .collect()
}
