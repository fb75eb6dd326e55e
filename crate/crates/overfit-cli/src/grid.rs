//! Numeric flag parsing: comma-separated lists and `start:stop:count`
//! inclusive ranges.

/// Parse a grid spec. `"a,b,c"` is a literal list; `"start:stop:count"` is
/// `count >= 2` evenly spaced points including both endpoints.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range spec must be start:stop:count, got `{spec}`"));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| format!("bad range start `{}`", parts[0]))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| format!("bad range stop `{}`", parts[1]))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad range count `{}`", parts[2]))?;
        if count < 2 {
            return Err(format!("range count must be >= 2, got {count}"));
        }
        let step = (stop - start) / (count - 1) as f64;
        Ok((0..count).map(|i| start + step * i as f64).collect())
    } else {
        spec.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad numeric value `{tok}`"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comma_lists() {
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_grid("0.25, 0.5,1").unwrap(), vec![0.25, 0.5, 1.0]);
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn inclusive_ranges() {
        let g = parse_grid("0.1:1:10").unwrap();
        assert_eq!(g.len(), 10);
        assert!((g[0] - 0.1).abs() < 1e-15);
        assert!((g[9] - 1.0).abs() < 1e-15);
        assert!((g[4] - 0.5).abs() < 1e-12); // fifth point of the spec example
        assert!(parse_grid("0:1:1").is_err());
        assert!(parse_grid("0:1").is_err());
    }
}
