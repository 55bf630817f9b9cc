use std::path::Path;

use qmlids_core::optimizers::TraceEntry;

use crate::error::Result;

pub fn trace_to_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("iteration,loss,evaluations\n");
    for t in trace {
        out.push_str(&format!("{},{},{}\n", t.iteration, t.loss, t.evaluations));
    }
    out
}

pub fn write_trace(path: &Path, trace: &[TraceEntry]) -> Result<()> {
    super::write_text(path, &trace_to_csv(trace))
}
