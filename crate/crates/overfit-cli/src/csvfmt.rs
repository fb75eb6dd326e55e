//! CSV cell formatting with a stable byte-level contract: floats carry 17
//! significant digits, divergence is the literal `inf`, undefined means are
//! the literal `nan`, out-of-domain optional cells are empty, rows end with
//! a single `\n`.

use overfit_core::ExcessValue;

/// A float with 17 significant digits (scientific, 16 fractional digits).
pub fn float17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

/// An excess-loss value; the divergence sentinel becomes the `inf` literal.
pub fn excess17(v: ExcessValue) -> String {
    match v {
        ExcessValue::Finite(x) => float17(x),
        ExcessValue::Infinite => "inf".to_string(),
    }
}

/// An optional cell; `None` is the empty field.
pub fn opt17(v: Option<f64>) -> String {
    v.map(float17).unwrap_or_default()
}

/// Compact parameter rendering for file names (shortest round-trip form).
pub fn param(v: f64) -> String {
    format!("{v}")
}

/// Assemble a CSV from a header and rows, each line `\n`-terminated.
pub fn table(header: &str, rows: &[Vec<String>]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(float17(0.0625), "6.2500000000000000e-2");
        assert_eq!(float17(0.125), "1.2500000000000000e-1");
        assert_eq!(float17(0.0), "0.0000000000000000e0");
        assert_eq!(float17(f64::INFINITY), "inf");
        assert_eq!(float17(f64::NAN), "nan");
    }

    #[test]
    fn sentinel_and_empty_cells() {
        assert_eq!(excess17(ExcessValue::Infinite), "inf");
        assert_eq!(excess17(ExcessValue::Finite(0.5)), "5.0000000000000000e-1");
        assert_eq!(opt17(None), "");
    }

    #[test]
    fn param_is_compact() {
        assert_eq!(param(0.5), "0.5");
        assert_eq!(param(1.0), "1");
        assert_eq!(param(0.25), "0.25");
    }

    #[test]
    fn table_line_endings() {
        let t = table("a,b", &[vec!["1".into(), "2".into()]]);
        assert_eq!(t, "a,b\n1,2\n");
    }
}
