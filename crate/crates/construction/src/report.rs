use std::fmt::Write as _;

/// One named check with a signed margin (non-negative means pass).
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    /// Whether a failure fails the level; soft clauses are recorded only.
    pub hard: bool,
    pub detail: String,
}

impl Clause {
    pub fn new(name: &str, pass: bool, margin: f64, hard: bool, detail: String) -> Self {
        Clause { name: name.to_string(), pass, margin, hard, detail }
    }

    /// Pass iff `value <= bound`; margin is `ln(bound / value)`.
    pub fn upper(name: &str, value: f64, bound: f64, hard: bool) -> Self {
        let margin = log_margin(bound, value);
        Clause::new(name, value <= bound, margin, hard, format!("value={value:e} bound={bound:e}"))
    }

    /// Pass iff `value >= bound`; margin is `ln(value / bound)`.
    pub fn lower(name: &str, value: f64, bound: f64, hard: bool) -> Self {
        let margin = log_margin(value, bound);
        Clause::new(name, value >= bound, margin, hard, format!("value={value:e} bound={bound:e}"))
    }
}

/// `ln(big / small)` with the zero cases made explicit.
pub fn log_margin(big: f64, small: f64) -> f64 {
    match (big == 0.0, small == 0.0) {
        (true, true) => 0.0,
        (false, true) => f64::INFINITY,
        (true, false) => f64::NEG_INFINITY,
        _ => (big / small).ln(),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelReport {
    pub level: usize,
    pub clauses: Vec<Clause>,
}

impl LevelReport {
    pub const CSV_HEADER: &'static str = "level,clause,pass,hard,log_margin,detail";

    pub fn new(level: usize) -> Self {
        LevelReport { level, clauses: Vec::new() }
    }

    pub fn push(&mut self, c: Clause) {
        self.clauses.push(c);
    }

    /// All hard clauses pass.
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass || !c.hard)
    }

    pub fn first_failure(&self) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.hard && !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for c in &self.clauses {
            let _ = writeln!(s, "{},{},{},{},{:.6e},\"{}\"", self.level, c.name, c.pass, c.hard, c.margin, c.detail);
        }
        s
    }
}
