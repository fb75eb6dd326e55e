//! Optional plot-script emission: a plain matplotlib script referencing the
//! CSVs by relative path. Plotting itself is outside the CLI contract; the
//! script is text output only.

/// One curve to draw: CSV file, x column, y columns with styles.
pub struct PlotSpec {
    /// Relative CSV path.
    pub file: String,
    /// Legend label prefix.
    pub label: String,
}

/// Build a matplotlib script plotting `y_columns` against `x_column` for
/// each listed CSV.
pub fn script(
    title: &str,
    x_column: &str,
    y_columns: &[(&str, &str)], // (column, line style)
    specs: &[PlotSpec],
    log_y: bool,
) -> String {
    let mut out = String::new();
    out.push_str("#!/usr/bin/env python3\n");
    out.push_str("# Auto-generated; expects the CSVs listed below next to this script.\n");
    out.push_str("import csv\n\nimport matplotlib.pyplot as plt\n\n\n");
    out.push_str(
        "def load(path):\n    with open(path, newline=\"\") as handle:\n        rows = list(csv.DictReader(handle))\n    cols = {}\n    for key in rows[0]:\n        cols[key] = [float(r[key]) if r[key] not in (\"\", \"inf\", \"nan\") else None for r in rows]\n    return cols\n\n\n",
    );
    out.push_str("fig, ax = plt.subplots(figsize=(7, 4.5))\n");
    for spec in specs {
        out.push_str(&format!("cols = load(\"{}\")\n", spec.file));
        for (column, style) in y_columns {
            out.push_str(&format!(
                "ax.plot(cols[\"{x_column}\"], cols[\"{column}\"], \"{style}\", label=\"{} {column}\")\n",
                spec.label
            ));
        }
    }
    out.push_str(&format!("ax.set_xlabel(\"{x_column}\")\n"));
    out.push_str("ax.set_ylabel(\"excess loss\")\n");
    if log_y {
        out.push_str("ax.set_yscale(\"log\")\n");
    }
    out.push_str(&format!("ax.set_title(\"{title}\")\n"));
    out.push_str("ax.legend(fontsize=7)\nfig.tight_layout()\nplt.savefig(\"plot.png\", dpi=150)\n");
    out
}
