//! Discovery trace log: one event per action, with a line format of
//! `step=<n> rule=<id> edge=<i,j> mark=<end:mark> because=<...>`.
//!
//! Deletions use `mark=drop`, separator recordings `mark=set`, and the
//! bulk circle reset after skeleton discovery `edge=* mark=o:o`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Error;
use crate::graph::{EndpointMark, VertexId};
use crate::Result;

/// What a trace event did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceAction {
    /// Removed the edge from the skeleton.
    DropEdge,
    /// Set `mark` at endpoint `at` of the edge.
    Orient { at: VertexId, mark: EndpointMark },
    /// Recorded a separating set (minimal or non-minimal).
    RecordSet,
    /// Reset every endpoint to a circle.
    ReorientAll,
}

/// One discovery action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u8,
    pub rule: String,
    /// `None` for whole-graph actions.
    pub edge: Option<(VertexId, VertexId)>,
    pub action: TraceAction,
    pub because: String,
}

impl TraceEvent {
    pub fn line(&self) -> String {
        let edge = match self.edge {
            Some((a, b)) => format!("{a},{b}"),
            None => "*".to_string(),
        };
        let mark = match &self.action {
            TraceAction::DropEdge => "drop".to_string(),
            TraceAction::Orient { at, mark } => format!("{}:{}", at, mark.symbol()),
            TraceAction::RecordSet => "set".to_string(),
            TraceAction::ReorientAll => "o:o".to_string(),
        };
        format!(
            "step={} rule={} edge={} mark={} because={}",
            self.step, self.rule, edge, mark, self.because
        )
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

/// Formats a vertex set as `{a,b,c}` (no spaces), the form used in
/// `because=` fields.
pub fn format_set(set: &BTreeSet<VertexId>) -> String {
    let inner: Vec<String> = set.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn field<'a>(tok: Option<&'a str>, key: &str, line_no: usize) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key))
        .ok_or_else(|| Error::parse(line_no, format!("expected `{key}...`")))
}

/// Parses a single trace line.
pub fn parse_trace_line(line: &str, line_no: usize) -> Result<TraceEvent> {
    let mut it = line.splitn(5, ' ');
    let step: u8 = field(it.next(), "step=", line_no)?
        .parse()
        .map_err(|_| Error::parse(line_no, "bad step"))?;
    let rule = field(it.next(), "rule=", line_no)?.to_string();
    let edge_tok = field(it.next(), "edge=", line_no)?;
    let edge = if edge_tok == "*" {
        None
    } else {
        let (a, b) = edge_tok
            .split_once(',')
            .ok_or_else(|| Error::parse(line_no, "bad edge"))?;
        let a: VertexId = a.parse().map_err(|_| Error::parse(line_no, "bad edge"))?;
        let b: VertexId = b.parse().map_err(|_| Error::parse(line_no, "bad edge"))?;
        Some((a, b))
    };
    let mark_tok = field(it.next(), "mark=", line_no)?;
    let action = match mark_tok {
        "drop" => TraceAction::DropEdge,
        "set" => TraceAction::RecordSet,
        "o:o" if edge.is_none() => TraceAction::ReorientAll,
        other => {
            let (at, m) = other
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "bad mark"))?;
            let at: VertexId = at.parse().map_err(|_| Error::parse(line_no, "bad mark"))?;
            let mark = EndpointMark::from_symbol(m)
                .ok_or_else(|| Error::parse(line_no, "bad mark symbol"))?;
            TraceAction::Orient { at, mark }
        }
    };
    let because = field(it.next(), "because=", line_no)?.to_string();
    Ok(TraceEvent {
        step,
        rule,
        edge,
        action,
        because,
    })
}

/// Parses a whole trace log (comments and blank lines allowed).
pub fn parse_trace(input: &str) -> Result<Vec<TraceEvent>> {
    let mut out = Vec::new();
    for (no, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_trace_line(line, no + 1)?);
    }
    Ok(out)
}

/// Replays a trace log from a complete circle graph on `p` vertices; the
/// result must equal the graph the original run emitted.
pub fn replay_trace(events: &[TraceEvent], p: usize) -> Result<crate::graph::MixedGraph> {
    let mut graph = crate::graph::MixedGraph::complete_circles(p);
    for (no, event) in events.iter().enumerate() {
        match (&event.action, event.edge) {
            (TraceAction::DropEdge, Some((a, b))) => {
                if !graph.remove_edge(a, b) {
                    return Err(Error::parse(no + 1, format!("no edge ({a},{b}) to drop")));
                }
            }
            (TraceAction::Orient { at, mark }, Some((a, b))) => {
                graph.set_mark(a, b, *at, *mark)?;
            }
            (TraceAction::RecordSet, _) => {}
            (TraceAction::ReorientAll, None) => graph.reset_all_marks_to_circles(),
            _ => return Err(Error::parse(no + 1, "malformed trace event")),
        }
    }
    Ok(graph)
}

/// Serializes a trace log.
pub fn write_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let events = vec![
            TraceEvent {
                step: 1,
                rule: "pc-skel".into(),
                edge: Some((0, 4)),
                action: TraceAction::DropEdge,
                because: "sep(0,4)={}".into(),
            },
            TraceEvent {
                step: 1,
                rule: "reorient".into(),
                edge: None,
                action: TraceAction::ReorientAll,
                because: "final-skeleton".into(),
            },
            TraceEvent {
                step: 2,
                rule: "vstruc".into(),
                edge: Some((0, 1)),
                action: TraceAction::Orient {
                    at: 1,
                    mark: EndpointMark::Arrow,
                },
                because: "sep(0,4)={}".into(),
            },
            TraceEvent {
                step: 4,
                rule: "supsep".into(),
                edge: Some((0, 4)),
                action: TraceAction::RecordSet,
                because: "supsep(0,1,4)={1,2}".into(),
            },
        ];
        let text = write_trace(&events);
        assert_eq!(parse_trace(&text).unwrap(), events);
    }

    #[test]
    fn replay_reproduces_a_discovery_run() {
        let g = crate::samples::five_var_latent_feedback();
        let oracle = crate::dsep::OracleCi::new(&g);
        let state =
            crate::cci::cci_run(&oracle, 5, &crate::cci::CciOptions::default()).unwrap();
        let replayed = replay_trace(&state.log, 5).unwrap();
        assert_eq!(replayed, state.graph);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_trace("nonsense").is_err());
        assert!(parse_trace("step=x rule=a edge=* mark=o:o because=b").is_err());
        assert!(parse_trace("step=1 rule=a edge=0 mark=drop because=b").is_err());
        assert!(parse_trace("step=1 rule=a edge=0,1 mark=9 because=b").is_err());
    }
}
