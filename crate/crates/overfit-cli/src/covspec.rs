//! Covariance specifications for correlated-feature experiments:
//! `identity`, `ar1:<rho>`, `diag:<v1,v2,...>`, or `@<file.csv>` holding a
//! dense `p x p` matrix.

use nalgebra::DMatrix;
use std::fs;

/// Parse a covariance spec into a `p x p` matrix.
pub fn parse_cov(spec: &str, p: usize) -> Result<DMatrix<f64>, String> {
    if spec == "identity" {
        return Ok(DMatrix::identity(p, p));
    }
    if let Some(rho_str) = spec.strip_prefix("ar1:") {
        let rho: f64 = rho_str
            .parse()
            .map_err(|_| format!("bad ar1 correlation `{rho_str}`"))?;
        if !(rho.abs() < 1.0) {
            return Err(format!("ar1 correlation must satisfy |rho| < 1, got {rho}"));
        }
        return Ok(DMatrix::from_fn(p, p, |i, j| {
            rho.powi((i as i32 - j as i32).abs())
        }));
    }
    if let Some(list) = spec.strip_prefix("diag:") {
        let values: Vec<f64> = list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad diagonal value `{tok}`"))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != p {
            return Err(format!(
                "diagonal has {} entries but p = {p}",
                values.len()
            ));
        }
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err("diagonal entries must be positive".to_string());
        }
        return Ok(DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                values[i]
            } else {
                0.0
            }
        }));
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read covariance file `{path}`: {e}"))?;
        let rows: Vec<Vec<f64>> = text
            .lines()
            .filter(|line| !line.trim().is_empty())
            .map(|line| {
                line.split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("bad matrix entry `{tok}` in `{path}`"))
                    })
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<_, _>>()?;
        if rows.len() != p || rows.iter().any(|r| r.len() != p) {
            return Err(format!("covariance file `{path}` is not {p} x {p}"));
        }
        return Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]));
    }
    Err(format!(
        "unknown covariance spec `{spec}` (expected identity, ar1:<rho>, diag:<v,..>, or @<file>)"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_specs() {
        assert_eq!(parse_cov("identity", 3).unwrap(), DMatrix::identity(3, 3));
        let ar = parse_cov("ar1:0.5", 3).unwrap();
        assert!((ar[(0, 2)] - 0.25).abs() < 1e-15);
        let d = parse_cov("diag:1,2,3", 3).unwrap();
        assert_eq!(d[(2, 2)], 3.0);
        assert!(parse_cov("ar1:1.0", 2).is_err());
        assert!(parse_cov("diag:1,2", 3).is_err());
        assert!(parse_cov("nonsense", 2).is_err());
    }

    #[test]
    fn file_spec_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cov.csv");
        std::fs::write(&path, "2,0.5\n0.5,1\n").unwrap();
        let spec = format!("@{}", path.display());
        let m = parse_cov(&spec, 2).unwrap();
        assert_eq!(m[(0, 0)], 2.0);
        assert_eq!(m[(1, 0)], 0.5);
        assert!(parse_cov(&spec, 3).is_err());
    }
}
