//! Deterministic CSV and JSON emission. Floats are printed with six
//! significant digits in CSV; identical inputs produce identical bytes.

use std::fmt::Write as _;

/// Formats a float with six significant digits, fixed-point for moderate
/// exponents and scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_fixed(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.5e}");
        // 1.99000e-4 -> 1.99e-4
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{e}", trim_fixed(mantissa.to_string())),
            None => s,
        }
    }
}

fn trim_fixed(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// One CSV cell: quotes fields containing separators or quotes (RFC 4180).
pub fn csv_cell(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Builds a CSV document from a header and rows of preformatted cells.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}", csv_cell(cell));
        }
        out.push('\n');
    }
    out
}

/// Writes `content` to the path, or stdout when no path is given.
pub fn write_output(path: Option<&std::path::Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(content.as_bytes())
        }
    }
}
