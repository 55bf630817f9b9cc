use std::collections::BTreeMap;
use std::path::Path;

use qmlids_core::transpiler::{CouplingGraph, Layout};

use crate::error::{Error, Result};

/// One `u v` pair per line; `#` comments and blank lines are ignored.
pub fn parse_edge_list(text: &str) -> Result<CouplingGraph> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Data(format!("edge list line {}: bad index `{t}`", i + 1))))
            .collect::<Result<_>>()?;
        match nums[..] {
            [u, v] => edges.push((u, v)),
            _ => return Err(Error::Data(format!("edge list line {}: expected `u v`", i + 1))),
        }
    }
    Ok(CouplingGraph::from_edges(edges)?)
}

pub fn read_edge_list(path: &Path) -> Result<CouplingGraph> {
    parse_edge_list(&super::read_text(path)?)
}

pub fn write_edge_list(g: &CouplingGraph) -> String {
    g.edges().iter().map(|(u, v)| format!("{u} {v}\n")).collect()
}

/// `{"logical": physical}` keyed by decimal strings.
pub fn layout_to_json(layout: &Layout) -> String {
    let m: BTreeMap<String, usize> = layout.to_map().into_iter().map(|(l, p)| (l.to_string(), p)).collect();
    serde_json::to_string(&m).expect("string map serializes")
}

pub fn layout_from_json(text: &str, device_qubits: usize) -> Result<Layout> {
    let m: BTreeMap<String, usize> = serde_json::from_str(text)?;
    let mut pairs: Vec<(usize, usize)> = m
        .into_iter()
        .map(|(k, p)| k.parse().map(|l| (l, p)).map_err(|_| Error::Data(format!("layout key `{k}` is not an index"))))
        .collect::<Result<_>>()?;
    pairs.sort_unstable();
    if pairs.iter().enumerate().any(|(i, &(l, _))| i != l) {
        return Err(Error::Data("layout keys must be 0..n".into()));
    }
    Ok(Layout::new(pairs.into_iter().map(|(_, p)| p).collect(), device_qubits)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let g = parse_edge_list("# line\n0 1\n1 2\n\n2 3\n").unwrap();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
        assert!(parse_edge_list("0 1 2\n").is_err());
        assert!(parse_edge_list("0 1\n2 3\n").is_err());
    }

    #[test]
    fn layout_round_trip() {
        let l = Layout::new(vec![2, 0, 3], 4).unwrap();
        let s = layout_to_json(&l);
        assert_eq!(s, r#"{"0":2,"1":0,"2":3}"#);
        assert_eq!(layout_from_json(&s, 4).unwrap(), l);
        assert!(layout_from_json(r#"{"0":1,"1":1}"#, 4).is_err());
    }
}
