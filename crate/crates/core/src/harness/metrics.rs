//! Output-quality metrics for SDC outcomes.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use thiserror::Error;

/// Floor for the relative-error denominator when the golden value is zero.
pub const REL_ERROR_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("length mismatch: {golden} vs {faulty}")]
    LengthMismatch { golden: usize, faulty: usize },
    #[error("empty input")]
    Empty,
    #[error("PSNR is undefined for identical images")]
    IdenticalImages,
}

fn same_len(golden: usize, faulty: usize) -> Result<(), MetricError> {
    if golden != faulty {
        return Err(MetricError::LengthMismatch { golden, faulty });
    }
    if golden == 0 {
        return Err(MetricError::Empty);
    }
    Ok(())
}

/// `10 log10(255^2 / MSE)` over 8-bit pixels.
pub fn psnr(golden: &[u8], faulty: &[u8]) -> Result<f64, MetricError> {
    same_len(golden.len(), faulty.len())?;
    let sse: u64 = golden
        .iter()
        .zip(faulty)
        .map(|(&g, &f)| {
            let d = g as i64 - f as i64;
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Err(MetricError::IdenticalImages);
    }
    let mse = sse as f64 / golden.len() as f64;
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Mean over elements of `min(1, |g - f| / max(|g|, eps))`. Non-finite faulty
/// values count as the maximal error 1.
pub fn avg_relative_error(golden: &[f64], faulty: &[f64]) -> Result<f64, MetricError> {
    same_len(golden.len(), faulty.len())?;
    let total: f64 = golden
        .iter()
        .zip(faulty)
        .map(|(&g, &f)| {
            let e = (g - f).abs() / g.abs().max(REL_ERROR_EPSILON);
            if e.is_finite() {
                e.min(1.0)
            } else {
                1.0
            }
        })
        .sum();
    Ok(total / golden.len() as f64)
}

/// Percentage of points whose faulty label maps to their golden label under
/// the one-to-one label matching that maximizes that percentage.
pub fn cluster_accuracy(golden: &[u8], faulty: &[u8]) -> Result<f64, MetricError> {
    same_len(golden.len(), faulty.len())?;
    let mut confusion = vec![[0i64; 256]; 256];
    for (&g, &f) in golden.iter().zip(faulty) {
        confusion[g as usize][f as usize] += 1;
    }
    let rows: Vec<usize> = (0..256).filter(|&g| confusion[g].iter().any(|&c| c > 0)).collect();
    let cols: Vec<usize> = (0..256)
        .filter(|&f| confusion.iter().any(|r| r[f] > 0))
        .collect();
    // Kuhn-Munkres needs no more rows than columns.
    let weights = if rows.len() <= cols.len() {
        Matrix::from_fn(rows.len(), cols.len(), |(i, j)| confusion[rows[i]][cols[j]])
    } else {
        Matrix::from_fn(cols.len(), rows.len(), |(i, j)| confusion[rows[j]][cols[i]])
    };
    let (matched, _) = kuhn_munkres(&weights);
    Ok(100.0 * matched as f64 / golden.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_examples() {
        let zeros = vec![0u8; 16];
        let full = vec![255u8; 16];
        assert!(psnr(&zeros, &full).unwrap().abs() < 1e-12);

        let a = vec![0u8; 64 * 64];
        let mut b = a.clone();
        b[100] = 255;
        let want = 10.0 * 4096f64.log10();
        assert!((psnr(&a, &b).unwrap() - want).abs() < 1e-12);
        assert!((want - 36.12).abs() < 0.005);
        assert_eq!(psnr(&a, &b), psnr(&b, &a));
        assert_eq!(psnr(&a, &a), Err(MetricError::IdenticalImages));
        assert!(matches!(psnr(&a, &b[1..]), Err(MetricError::LengthMismatch { .. })));
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(avg_relative_error(&[2.0, 4.0], &[1.0, 4.0]).unwrap(), 0.25);
        assert_eq!(avg_relative_error(&[1.0], &[100.0]).unwrap(), 1.0);
        assert_eq!(avg_relative_error(&[0.0], &[0.0]).unwrap(), 0.0);
        assert_eq!(avg_relative_error(&[0.0], &[1e-13]).unwrap(), 0.1);
        assert_eq!(avg_relative_error(&[1.0], &[f64::NAN]).unwrap(), 1.0);
        assert!(avg_relative_error(&[1.0], &[]).is_err());
        assert_eq!(avg_relative_error(&[], &[]), Err(MetricError::Empty));
    }

    #[test]
    fn cluster_accuracy_examples() {
        let g = [0u8, 0, 1, 1, 2, 2, 3, 3];
        assert_eq!(cluster_accuracy(&g, &g).unwrap(), 100.0);
        let permuted: Vec<u8> = g.iter().map(|&l| (l + 1) % 4).collect();
        assert_eq!(cluster_accuracy(&g, &permuted).unwrap(), 100.0);
        let half = [0u8, 0, 0, 0, 1, 1, 1, 1];
        let f = [0u8, 0, 1, 1, 2, 2, 3, 3];
        assert_eq!(cluster_accuracy(&half, &f).unwrap(), 50.0);
        assert!(cluster_accuracy(&g, &g[1..]).is_err());
    }

    #[test]
    fn cluster_matching_is_optimal_where_greedy_is_not() {
        // Greedy would take the 3, then the 2 at (2, 0), and reach 6 of 11.
        let confusion = [[0, 1, 0, 0], [0, 0, 3, 0], [2, 0, 1, 2], [2, 0, 0, 0]];
        let (mut g, mut f) = (Vec::new(), Vec::new());
        for (i, row) in confusion.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                for _ in 0..n {
                    g.push(i as u8);
                    f.push(j as u8);
                }
            }
        }
        assert_eq!(cluster_accuracy(&g, &f).unwrap(), 800.0 / 11.0);
    }

    #[test]
    fn cluster_matching_with_more_faulty_labels() {
        let g = [0u8, 0, 0, 1, 1, 1];
        let f = [7u8, 7, 200, 3, 3, 9];
        assert_eq!(cluster_accuracy(&g, &f).unwrap(), 400.0 / 6.0);
        assert_eq!(cluster_accuracy(&f, &g).unwrap(), 400.0 / 6.0);
    }
}
