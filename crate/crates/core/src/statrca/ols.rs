//! Least squares via Householder QR.

/// Residual sum of squares of an OLS fit, or `None` when the design matrix
/// is numerically rank deficient.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub rss: f64,
    pub coefficients: Vec<f64>,
}

/// Relative threshold on |R_jj| / max column norm below which the design is
/// treated as singular.
const RANK_TOL: f64 = 1e-10;

/// Fits `y ~ X b` where `columns` holds the design matrix column by column.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<OlsFit> {
    let n = y.len();
    let p = columns.len();
    if p == 0 || n < p || columns.iter().any(|c| c.len() != n) {
        return None;
    }
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    let max_norm = a
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0_f64, f64::max);
    if max_norm == 0.0 {
        return None;
    }

    let mut diag = vec![0.0; p];
    for j in 0..p {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= RANK_TOL * max_norm {
            return None;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in place of column j
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j + 1) {
            let dot: f64 = v.iter().zip(&col[j..]).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in col[j..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        let dot: f64 = v.iter().zip(&qty[j..]).map(|(a, b)| a * b).sum();
        let s = 2.0 * dot / vnorm2;
        for (c, vi) in qty[j..].iter_mut().zip(&v) {
            *c -= s * vi;
        }
    }

    let mut coefficients = vec![0.0; p];
    for j in (0..p).rev() {
        let mut acc = qty[j];
        for (k, col) in a.iter().enumerate().skip(j + 1) {
            acc -= col[j] * coefficients[k];
        }
        coefficients[j] = acc / diag[j];
    }
    let rss = qty[p..].iter().map(|v| v * v).sum();
    Some(OlsFit { rss, coefficients })
}
