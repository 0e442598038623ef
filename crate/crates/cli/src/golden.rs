//! Golden text of hierarchy levels and line-based comparison.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use fracflow::diffpoly::text::ToText;
use fracflow::diffpoly::{Hierarchy, Sector};

/// Levels shipped in the golden files.
pub const GOLDEN_LEVELS: usize = 4;

/// Directory of the golden files in the source tree.
pub fn default_dir() -> PathBuf {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden");
    dir.canonicalize().unwrap_or(dir)
}

pub fn file_name(sector: Sector) -> String {
    format!("hierarchy_{}.txt", sector.short_name())
}

/// Renders levels in order; the text for `k_max` is a prefix of the text for
/// any larger `k_max`.
pub fn render(h: &Hierarchy) -> String {
    let s = h.sector.symbol();
    let mut out = String::new();
    let _ = writeln!(out, "# fracflow hierarchy, sector {} (symbol {s})", h.sector.short_name());
    for l in &h.levels {
        let _ = writeln!(out, "\n[level {}]", l.k);
        let _ = writeln!(out, "flow = {}", l.flow.to_text(s));
        let _ = writeln!(out, "covector = {}", l.covector.to_text(s));
        let _ = writeln!(out, "hamiltonian = {}", l.hamiltonian.to_text(s));
    }
    out
}

/// First difference between two texts.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    /// 1-based line number.
    pub line: usize,
    pub expected: Option<String>,
    pub found: Option<String>,
}

impl Mismatch {
    /// A short diff excerpt (long lines are truncated).
    pub fn excerpt(&self) -> String {
        let clip = |s: &Option<String>| match s {
            None => "<end of file>".to_string(),
            Some(s) if s.chars().count() > 100 => format!("{}…", s.chars().take(100).collect::<String>()),
            Some(s) => s.clone(),
        };
        format!("line {}: -{} / +{}", self.line, clip(&self.expected), clip(&self.found))
    }
}

/// Byte-exact comparison reported by line: `None` when identical.
pub fn compare(expected: &str, found: &str) -> Option<Mismatch> {
    if expected == found {
        return None;
    }
    let (mut a, mut b) = (expected.split('\n'), found.split('\n'));
    let mut line = 1;
    loop {
        match (a.next(), b.next()) {
            (Some(x), Some(y)) if x == y => line += 1,
            (x, y) => {
                return Some(Mismatch { line, expected: x.map(str::to_string), found: y.map(str::to_string) });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracflow::diffpoly::DiffAlgebra;

    #[test]
    fn lower_levels_are_a_prefix() {
        let a = DiffAlgebra::default();
        let h2 = render(&a.generate_hierarchy(2, Sector::Horizontal).unwrap());
        let h3 = render(&a.generate_hierarchy(3, Sector::Horizontal).unwrap());
        assert!(h3.starts_with(&h2));
        assert!(h2.contains("flow = v3 + 3/2*<v0,v0>*v1"));
    }

    #[test]
    fn compare_reports_first_difference() {
        assert_eq!(compare("a\nb\n", "a\nb\n"), None);
        let m = compare("a\nb\nc\n", "a\nB\nc\n").unwrap();
        assert_eq!(m.line, 2);
        assert_eq!(m.excerpt(), "line 2: -b / +B");
        let m = compare("a\n", "a\nextra").unwrap();
        assert_eq!((m.line, m.expected.as_deref(), m.found.as_deref()), (2, Some(""), Some("extra")));
    }
}
