//! Per-stage log of a solver run.

use std::time::Instant;

#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub lines: Vec<StageLine>,
}

#[derive(Clone, Debug)]
pub struct StageLine {
    pub stage: String,
    pub millis: f64,
    pub note: String,
}

impl Trace {
    pub fn time<T, E>(&mut self, stage: &str, f: impl FnOnce() -> Result<T, E>) -> Result<T, E> {
        let t = Instant::now();
        let r = f();
        let note = if r.is_ok() { "ok" } else { "failed" };
        self.lines.push(StageLine { stage: stage.to_string(), millis: t.elapsed().as_secs_f64() * 1e3, note: note.into() });
        r
    }

    pub fn note(&mut self, stage: &str, note: impl Into<String>) {
        self.lines.push(StageLine { stage: stage.to_string(), millis: 0.0, note: note.into() });
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|l| format!("stage={} ms={:.2} {}\n", l.stage, l.millis, l.note)).collect()
    }
}
