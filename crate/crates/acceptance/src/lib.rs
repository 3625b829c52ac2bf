//! Verdict lines for the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;

/// One sub-check of a criterion.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), pass, detail: detail.into() }
    }
}

/// Prints `AC-k PASS|FAIL: ...` straight to stderr, bypassing the test
/// harness capture, and returns whether every check passed.
pub fn verdict(id: &str, checks: &[Check]) -> bool {
    let pass = checks.iter().all(|c| c.pass);
    let parts: Vec<String> =
        checks.iter().map(|c| format!("{}{} ({})", if c.pass { "" } else { "!" }, c.name, c.detail)).collect();
    let line = format!("{id} {}: {}\n", if pass { "PASS" } else { "FAIL" }, parts.join("; "));
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_needs_every_check() {
        assert!(verdict("AC-0", &[Check::new("a", true, "1")]));
        assert!(!verdict("AC-0", &[Check::new("a", true, "1"), Check::new("b", false, "2")]));
    }
}
