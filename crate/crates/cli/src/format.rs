//! Number formatting and plain-text tables.

use std::io::IsTerminal;

/// `%g`-style rendering with `digits` significant digits.
pub fn num(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |x| num(x, digits))
}

/// Whether to emit ANSI styling.
pub fn color_enabled() -> bool {
    std::env::var_os("PTEX_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

/// Left-aligned first column, right-aligned numbers.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) {
        self.rows.push(cells.into_iter().map(Into::into).collect());
    }

    pub fn render(&self, color: bool) -> String {
        let ncol = self.header.len();
        let mut width = vec![0; ncol];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(j, (c, w))| if j == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        let head = line(&self.header);
        if color {
            out.push_str(&format!("\x1b[1m{head}\x1b[0m\n"));
        } else {
            out.push_str(&head);
            out.push('\n');
        }
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(num(-0.70048123, 6), "-0.700481");
        assert_eq!(num(-594.8500, 6), "-594.85");
        assert_eq!(num(1.0, 6), "1");
        assert_eq!(num(123456789.0, 6), "1.23457e+08");
        assert_eq!(num(0.000012345, 3), "1.23e-05");
        assert_eq!(num(0.0001, 6), "0.0001");
        assert_eq!(num(0.0, 6), "0");
        assert_eq!(num(2.4, 1), "2");
        assert_eq!(num(f64::NAN, 6), "NaN");
    }

    #[test]
    fn aligned_table() {
        let mut t = Table::new(["x", "value"]);
        t.row(["a", "1"]);
        t.row(["bbb", "22.5"]);
        assert_eq!(t.render(false), "x    value\na        1\nbbb   22.5\n");
    }
}
