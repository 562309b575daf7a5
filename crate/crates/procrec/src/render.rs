//! Deterministic DOT output for extracted and recommended processes.
//!
//! The drawing follows one template: a left-to-right flow of activity lanes
//! (preproduction, production, postproduction) between a start disc and an
//! end disc, plus frames for team and process characteristics. Activities
//! whose stage is unknown sit in their own lane, suffixed with `??`, and get
//! no flow edges — sequence is never fabricated. Each node links to note
//! boxes naming the source games, with the quotation as tooltip.
//!
//! Output is byte-stable: LF line endings, fixed iteration orders, slugged
//! node identifiers, and every attribute value quoted.

use std::collections::BTreeMap;

use crate::corpus::{ElementStore, Phase, Subphase};
use crate::error::{Error, Result};
use crate::recommender::{recommend, MergedElement, RecommendedProcess};
use crate::similarity::{Neighbor, SimilarityRanking};

/// Knobs for the emitted graph. Colors are indices into the emitted
/// colorscheme, so re-theming the whole drawing is a change here, not in the
/// emitter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderOptions {
    /// Brewer scheme set on all nodes.
    pub colorscheme: String,
    /// Fill for elements that went well.
    pub normal_color: String,
    /// Fill for elements whose sources reported problems.
    pub problem_color: String,
    /// Append the gold-master terminal after the end disc.
    pub gold_terminal: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            colorscheme: "rdylgn11".into(),
            normal_color: "9".into(),
            problem_color: "3".into(),
            gold_terminal: false,
        }
    }
}

/// A quotation note attached to a node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuoteBox {
    pub id: String,
    pub game: String,
    pub desc: String,
}

/// One drawable element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphNode {
    pub id: String,
    pub label: String,
    pub problematic: bool,
    pub quotes: Vec<QuoteBox>,
}

/// An activity lane; `subphase: None` is the unknown-order lane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lane {
    pub subphase: Option<Subphase>,
    pub nodes: Vec<GraphNode>,
}

/// A non-flow frame (team, characteristics).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub phase: Phase,
    pub nodes: Vec<GraphNode>,
}

/// Everything the emitter draws, already ordered and slugged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessGraphSpec {
    pub title: String,
    pub lanes: Vec<Lane>,
    pub frames: Vec<Frame>,
}

impl ProcessGraphSpec {
    /// Lays out a recommended process: one node per merged element, one
    /// quote box per source.
    pub fn from_recommended(process: &RecommendedProcess) -> Result<ProcessGraphSpec> {
        if process.elements.is_empty() {
            return Err(Error::EmptyProcess);
        }
        Self::from_elements(
            format!("recommended process: {}", process.target),
            &process.elements,
        )
    }

    /// Lays out the process extracted from one game's own records.
    pub fn from_extracted(store: &ElementStore, game: &str) -> Result<ProcessGraphSpec> {
        if store.records_of(game).is_empty() {
            return Err(Error::UnknownGame {
                name: game.to_string(),
            });
        }
        // a single-neighbor merge reuses the grouping and ordering rules and
        // keeps the layout independent of store row order
        let ranking = SimilarityRanking {
            target: game.to_string(),
            neighbors: vec![Neighbor {
                game: game.to_string(),
                distance: 0.0,
            }],
        };
        let process = recommend(store, &ranking)?;
        Self::from_elements(format!("extracted process: {game}"), &process.elements)
    }

    fn from_elements(title: String, elements: &[MergedElement]) -> Result<ProcessGraphSpec> {
        let mut slugs = SlugTable::new();
        let lane_order = [
            Some(Subphase::Preproduction),
            Some(Subphase::Production),
            Some(Subphase::Postproduction),
            None,
        ];
        let mut lanes: Vec<Lane> = Vec::new();
        for subphase in lane_order {
            let nodes: Vec<GraphNode> = elements
                .iter()
                .filter(|e| e.phase == Phase::Activities && e.subphase == subphase)
                .map(|e| slugs.node_for(e, lane_prefix(Phase::Activities, subphase)))
                .collect();
            if !nodes.is_empty() {
                lanes.push(Lane { subphase, nodes });
            }
        }
        let mut frames: Vec<Frame> = Vec::new();
        for phase in [Phase::Team, Phase::Characteristics] {
            let nodes: Vec<GraphNode> = elements
                .iter()
                .filter(|e| e.phase == phase)
                .map(|e| slugs.node_for(e, lane_prefix(phase, None)))
                .collect();
            if !nodes.is_empty() {
                frames.push(Frame { phase, nodes });
            }
        }
        if lanes.is_empty() && frames.is_empty() {
            return Err(Error::EmptyProcess);
        }
        Ok(ProcessGraphSpec {
            title,
            lanes,
            frames,
        })
    }

    pub fn node_count(&self) -> usize {
        self.lanes.iter().map(|l| l.nodes.len()).sum::<usize>()
            + self.frames.iter().map(|f| f.nodes.len()).sum::<usize>()
    }

    pub fn quote_count(&self) -> usize {
        self.lanes
            .iter()
            .flat_map(|l| &l.nodes)
            .chain(self.frames.iter().flat_map(|f| &f.nodes))
            .map(|n| n.quotes.len())
            .sum()
    }
}

fn lane_prefix(phase: Phase, subphase: Option<Subphase>) -> &'static str {
    match (phase, subphase) {
        (Phase::Activities, Some(Subphase::Preproduction)) => "pre",
        (Phase::Activities, Some(Subphase::Production)) => "prod",
        (Phase::Activities, Some(Subphase::Postproduction)) => "post",
        (Phase::Activities, None) => "act",
        (Phase::Team, _) => "team",
        (Phase::Characteristics, _) => "char",
        (Phase::Feedback, _) => "feedback",
    }
}

fn lane_label(subphase: Option<Subphase>) -> &'static str {
    match subphase {
        Some(s) => s.as_str(),
        None => "unordered ??",
    }
}

/// Node id assignment: `<prefix>_<slug>` with a counter on collisions.
struct SlugTable {
    taken: BTreeMap<String, usize>,
}

impl SlugTable {
    fn new() -> SlugTable {
        SlugTable {
            taken: BTreeMap::new(),
        }
    }

    fn assign(&mut self, prefix: &str, raw: &str) -> String {
        let base = format!("{prefix}_{}", slug(raw));
        let n = self.taken.entry(base.clone()).or_insert(0);
        *n += 1;
        if *n == 1 {
            base
        } else {
            format!("{base}_{n}")
        }
    }

    fn node_for(&mut self, element: &MergedElement, prefix: &str) -> GraphNode {
        let id = self.assign(prefix, &element.key);
        let label = if element.phase == Phase::Activities && element.subphase.is_none() {
            format!("{} ??", element.key)
        } else {
            element.key.clone()
        };
        let quotes = element
            .sources
            .iter()
            .enumerate()
            .map(|(i, source)| QuoteBox {
                id: format!("{id}_q{i}"),
                game: source.game.clone(),
                desc: source.desc.clone(),
            })
            .collect();
        GraphNode {
            id,
            label,
            problematic: element.prob,
            quotes,
        }
    }
}

/// Lowercase, alphanumerics kept, everything else one underscore.
pub(crate) fn slug(raw: &str) -> String {
    raw.to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn escape(raw: &str) -> String {
    raw.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// Emits the graph as DOT text. Same spec and options always yield the same
/// bytes.
pub fn render_dot(spec: &ProcessGraphSpec, options: &RenderOptions) -> String {
    let mut out = String::new();
    let line = |out: &mut String, depth: usize, text: &str| {
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push_str(text);
        out.push('\n');
    };

    line(&mut out, 0, "digraph process {");
    line(
        &mut out,
        1,
        &format!(
            "graph [label=\"{}\", labelloc=\"t\", rankdir=\"LR\", compound=\"true\", fontname=\"Helvetica\"];",
            escape(&spec.title)
        ),
    );
    line(
        &mut out,
        1,
        &format!(
            "node [fontname=\"Helvetica\", style=\"filled\", colorscheme=\"{}\", fillcolor=\"{}\"];",
            escape(&options.colorscheme),
            escape(&options.normal_color)
        ),
    );
    line(&mut out, 1, "edge [fontname=\"Helvetica\"];");
    line(
        &mut out,
        1,
        "start [shape=\"circle\", label=\"start\", fillcolor=\"white\"];",
    );
    line(
        &mut out,
        1,
        "end [shape=\"doublecircle\", label=\"end\", fillcolor=\"white\"];",
    );
    if options.gold_terminal {
        line(
            &mut out,
            1,
            "gold [shape=\"doublecircle\", label=\"gold master\", colorscheme=\"x11\", fillcolor=\"gold\"];",
        );
    }

    let emit_node = |out: &mut String, depth: usize, node: &GraphNode| {
        let fill = if node.problematic {
            &options.problem_color
        } else {
            &options.normal_color
        };
        line(
            out,
            depth,
            &format!(
                "\"{}\" [shape=\"box\", label=\"{}\", fillcolor=\"{}\"];",
                node.id,
                escape(&node.label),
                escape(fill)
            ),
        );
        for quote in &node.quotes {
            line(
                out,
                depth,
                &format!(
                    "\"{}\" [shape=\"note\", label=\"{}\", tooltip=\"{}\", fillcolor=\"white\"];",
                    quote.id,
                    escape(&quote.game),
                    escape(&quote.desc)
                ),
            );
            line(
                out,
                depth,
                &format!(
                    "\"{}\" -> \"{}\" [style=\"dotted\", arrowhead=\"none\"];",
                    node.id, quote.id
                ),
            );
        }
    };

    for lane in &spec.lanes {
        let cluster = cluster_id(lane.subphase);
        line(&mut out, 1, &format!("subgraph {cluster} {{"));
        line(
            &mut out,
            2,
            &format!("graph [label=\"{}\"];", escape(lane_label(lane.subphase))),
        );
        for node in &lane.nodes {
            emit_node(&mut out, 2, node);
        }
        line(&mut out, 1, "}");
    }

    for frame in &spec.frames {
        let name = frame.phase.as_str();
        line(&mut out, 1, &format!("subgraph cluster_{name} {{"));
        line(&mut out, 2, &format!("graph [label=\"{}\"];", name));
        for node in &frame.nodes {
            emit_node(&mut out, 2, node);
        }
        line(&mut out, 1, "}");
    }

    // flow skeleton: chain the staged lanes between the discs; the
    // unordered lane and the frames float free on purpose
    let staged: Vec<&Lane> = spec.lanes.iter().filter(|l| l.subphase.is_some()).collect();
    if staged.is_empty() {
        line(&mut out, 1, "start -> end;");
    } else {
        for (i, lane) in staged.iter().enumerate() {
            let cluster = cluster_id(lane.subphase);
            let entry = &lane.nodes.first().unwrap().id;
            let exit = &lane.nodes.last().unwrap().id;
            if i == 0 {
                line(
                    &mut out,
                    1,
                    &format!("start -> \"{entry}\" [lhead=\"{cluster}\"];"),
                );
            }
            match staged.get(i + 1) {
                Some(next) => {
                    let next_cluster = cluster_id(next.subphase);
                    let next_entry = &next.nodes.first().unwrap().id;
                    line(
                        &mut out,
                        1,
                        &format!(
                            "\"{exit}\" -> \"{next_entry}\" [ltail=\"{cluster}\", lhead=\"{next_cluster}\"];"
                        ),
                    );
                }
                None => {
                    line(
                        &mut out,
                        1,
                        &format!("\"{exit}\" -> end [ltail=\"{cluster}\"];"),
                    );
                }
            }
        }
    }
    if options.gold_terminal {
        line(&mut out, 1, "end -> gold;");
    }
    line(&mut out, 0, "}");
    out
}

fn cluster_id(subphase: Option<Subphase>) -> String {
    match subphase {
        Some(s) => format!("cluster_{}", s.as_str()),
        None => "cluster_unordered".to_string(),
    }
}

/// Renders a recommended process; errors if it has no elements.
pub fn render_recommended(
    process: &RecommendedProcess,
    options: &RenderOptions,
) -> Result<String> {
    let spec = ProcessGraphSpec::from_recommended(process)?;
    let dot = render_dot(&spec, options);
    check_well_formed(&dot)?;
    Ok(dot)
}

/// Renders the process extracted from one game's records.
pub fn render_extracted(
    store: &ElementStore,
    game: &str,
    options: &RenderOptions,
) -> Result<String> {
    let spec = ProcessGraphSpec::from_extracted(store, game)?;
    let dot = render_dot(&spec, options);
    check_well_formed(&dot)?;
    Ok(dot)
}

/// Minimal DOT well-formedness check: LF-only, balanced braces and brackets
/// outside quoted strings, and every attribute value quoted.
pub fn check_well_formed(dot: &str) -> Result<()> {
    if dot.contains('\r') {
        return Err(Error::Internal("dot output contains CR".into()));
    }
    if !dot.starts_with("digraph ") {
        return Err(Error::Internal("dot output must start with digraph".into()));
    }
    let mut braces: i64 = 0;
    let mut brackets: i64 = 0;
    let mut in_quote = false;
    let mut escaped = false;
    let mut chars = dot.chars().peekable();
    while let Some(c) = chars.next() {
        if in_quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
            }
            continue;
        }
        match c {
            '"' => in_quote = true,
            '{' => braces += 1,
            '}' => {
                braces -= 1;
                if braces < 0 {
                    return Err(Error::Internal("unbalanced closing brace".into()));
                }
            }
            '[' => brackets += 1,
            ']' => {
                brackets -= 1;
                if brackets < 0 {
                    return Err(Error::Internal("unbalanced closing bracket".into()));
                }
            }
            '/' if chars.peek() == Some(&'/') => {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '=' if brackets > 0 => {
                while chars.peek() == Some(&' ') {
                    chars.next();
                }
                if chars.peek() != Some(&'"') {
                    return Err(Error::Internal(format!(
                        "unquoted attribute value after '=' (next: {:?})",
                        chars.peek()
                    )));
                }
            }
            _ => {}
        }
    }
    if in_quote {
        return Err(Error::Internal("unterminated quoted string".into()));
    }
    if braces != 0 || brackets != 0 {
        return Err(Error::Internal("unbalanced braces or brackets".into()));
    }
    Ok(())
}
