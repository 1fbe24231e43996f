//! Serialization of a [`StoryState`]: structural summaries for the golden
//! corpus, a lossless JSON dump, and DOT graphs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LinkKind, SceneId, StoryState};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("invalid state json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported state format {found:?}, expected {expected:?}")]
    Format { found: String, expected: String },
}

pub const STATE_FORMAT: &str = "xapi-state/1";
pub const SUMMARY_FORMAT: &str = "xapi-summary/1";

/// Deterministic structural digest of a state. Equal states render to
/// byte-equal text; the corpus fixtures freeze that text.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSummary {
    pub scenes: Vec<SceneSummary>,
    pub identity_chains: Vec<Vec<u32>>,
    pub coincidence_groups: Vec<Vec<u32>>,
    pub scene_relations: Vec<(u32, String, u32)>,
    pub current_scene: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSummary {
    pub id: u32,
    pub label: Option<String>,
    pub instances: usize,
    pub vis: usize,
    pub focus_instances: Vec<u32>,
    pub focus_vis: Vec<u32>,
}

/// Compute the summary; ids appear in creation order.
pub fn summarize(state: &StoryState) -> GraphSummary {
    let focus = state.focus_snapshot();
    GraphSummary {
        scenes: state
            .scenes
            .iter()
            .zip(&focus.scenes)
            .map(|(scene, focus)| SceneSummary {
                id: scene.id.0,
                label: scene.label.clone(),
                instances: scene.members.len(),
                vis: scene.vis.len(),
                focus_instances: focus.instances.iter().map(|i| i.0).collect(),
                focus_vis: focus.vis.iter().map(|v| v.0).collect(),
            })
            .collect(),
        identity_chains: state
            .identity_chains()
            .into_iter()
            .map(|chain| chain.into_iter().map(|i| i.0).collect())
            .collect(),
        coincidence_groups: state
            .coincidence_groups()
            .into_iter()
            .map(|group| group.into_iter().map(|v| v.0).collect())
            .collect(),
        scene_relations: state
            .scenes
            .iter()
            .flat_map(|scene| {
                scene
                    .relations
                    .iter()
                    .map(|r| (scene.id.0, r.verb.clone(), r.target.0))
            })
            .collect(),
        current_scene: state.current_scene.map(|s| s.0),
    }
}

impl std::fmt::Display for GraphSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{SUMMARY_FORMAT}")?;
        writeln!(f, "scenes: {}", self.scenes.len())?;
        for scene in &self.scenes {
            let label = scene
                .label
                .as_ref()
                .map(|l| format!("#{l}"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "scene {} {label}: instances={} vis={}",
                scene.id, scene.instances, scene.vis
            )?;
            writeln!(f, "  focus instances: {}", join_ids(&scene.focus_instances))?;
            writeln!(f, "  focus vis: {}", join_ids(&scene.focus_vis))?;
        }
        writeln!(f, "identity-chains: {}", self.identity_chains.len())?;
        for chain in &self.identity_chains {
            writeln!(f, "  chain: {}", join_ids(chain))?;
        }
        writeln!(f, "coincidence-groups: {}", self.coincidence_groups.len())?;
        for group in &self.coincidence_groups {
            writeln!(f, "  group size={}: {}", group.len(), join_ids(group))?;
        }
        writeln!(f, "scene-relations: {}", self.scene_relations.len())?;
        for (from, verb, to) in &self.scene_relations {
            writeln!(f, "  relation: {from} {verb} {to}")?;
        }
        match self.current_scene {
            Some(id) => writeln!(f, "current-scene: {id}"),
            None => writeln!(f, "current-scene: -"),
        }
    }
}

fn join_ids(ids: &[u32]) -> String {
    if ids.is_empty() {
        return "-".into();
    }
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize, Deserialize)]
struct StateDump {
    scenes: Vec<crate::model::Scene>,
    instances: Vec<crate::model::Instance>,
    vis: Vec<crate::model::VerbInstance>,
    identity_edges: Vec<crate::model::IdentityEdge>,
    links: Vec<crate::model::LinkEdge>,
    labels: std::collections::BTreeMap<String, crate::model::ViId>,
    current_scene: Option<SceneId>,
    format: String,
}

/// Lossless JSON dump; `from_json` reloads it into an equal state.
pub fn to_json(state: &StoryState) -> String {
    let dump = StateDump {
        scenes: state.scenes.clone(),
        instances: state.instances.clone(),
        vis: state.vis.clone(),
        identity_edges: state.identity_edges.clone(),
        links: state.links.clone(),
        labels: state.labels.clone(),
        current_scene: state.current_scene,
        format: STATE_FORMAT.to_string(),
    };
    let mut text = serde_json::to_string_pretty(&dump).expect("state serializes");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<StoryState, ExportError> {
    let dump: StateDump = serde_json::from_str(text)?;
    if dump.format != STATE_FORMAT {
        return Err(ExportError::Format {
            found: dump.format,
            expected: STATE_FORMAT.to_string(),
        });
    }
    Ok(StoryState {
        scenes: dump.scenes,
        instances: dump.instances,
        vis: dump.vis,
        identity_edges: dump.identity_edges,
        links: dump.links,
        labels: dump.labels,
        current_scene: dump.current_scene,
    })
}

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    /// Only render in-focus instances and VIs.
    pub focus_only: bool,
    /// Only render scenes with these labels (empty = all).
    pub scene_filter: Vec<String>,
}

/// Render the state as a DOT digraph: scenes as clusters, instances as
/// boxes (shaded when in focus), VIs as ellipses; identity edges dashed,
/// coincidence edges bold, succession edges plain, summarization and quote
/// edges dotted.
pub fn to_dot(state: &StoryState, options: &DotOptions) -> String {
    let mut out = String::from("digraph xapi {\n");
    out.push_str("  rankdir=LR;\n  node [fontsize=10];\n");

    let scene_visible = |id: SceneId| -> bool {
        if options.scene_filter.is_empty() {
            return true;
        }
        state.scenes[id.index()]
            .label
            .as_ref()
            .map(|l| options.scene_filter.iter().any(|f| f == l))
            .unwrap_or(false)
    };

    let mut instance_visible = vec![false; state.instances.len()];
    let mut vi_visible = vec![false; state.vis.len()];

    for scene in &state.scenes {
        if !scene_visible(scene.id) {
            continue;
        }
        let label = scene
            .label
            .as_ref()
            .map(|l| format!("#{l}"))
            .unwrap_or_else(|| format!("scene {}", scene.id));
        let _ = writeln!(out, "  subgraph cluster_{} {{", scene.id);
        let _ = writeln!(out, "    label=\"{label}\";");
        for id in &scene.members {
            let instance = &state.instances[id.index()];
            if options.focus_only && !instance.in_focus {
                continue;
            }
            instance_visible[id.index()] = true;
            let mut text = instance.attributes.join(" ");
            if let Some(name) = &instance.proper_name {
                if !text.is_empty() {
                    text.push(' ');
                }
                text.push_str(&format!("\\\"{name}\\\""));
            }
            let style = if instance.in_focus {
                "style=filled, fillcolor=lightgrey"
            } else {
                "style=solid"
            };
            let _ = writeln!(
                out,
                "    i{} [shape=box, {style}, label=\"i{}: {text}\"];",
                id.0, id.0
            );
        }
        for id in &scene.vis {
            let vi = &state.vis[id.index()];
            if options.focus_only && !vi.in_focus {
                continue;
            }
            vi_visible[id.index()] = true;
            let neg = if vi.negated { "not-" } else { "" };
            let style = if vi.in_focus {
                "style=filled, fillcolor=lightyellow"
            } else {
                "style=solid"
            };
            let _ = writeln!(
                out,
                "    v{} [shape=ellipse, {style}, label=\"v{}: {neg}{}\"];",
                id.0, id.0, vi.verb
            );
        }
        out.push_str("  }\n");
    }

    for vi in &state.vis {
        if !vi_visible[vi.id.index()] {
            continue;
        }
        if instance_visible[vi.subject.index()] {
            let _ = writeln!(out, "  v{} -> i{} [color=gray, arrowhead=none];", vi.id, vi.subject);
        }
        if let Some(object) = vi.object {
            if instance_visible[object.index()] {
                let _ = writeln!(out, "  v{} -> i{} [color=gray];", vi.id, object);
            }
        }
        if let Some(inner) = vi.quoted_vi {
            if vi_visible[inner.index()] {
                let _ = writeln!(out, "  v{} -> v{} [style=dotted, label=\"quote\"];", vi.id, inner);
            }
        }
    }
    for edge in &state.identity_edges {
        if instance_visible[edge.a.index()] && instance_visible[edge.b.index()] {
            let _ = writeln!(
                out,
                "  i{} -> i{} [style=dashed, dir=none, label=\"identity\"];",
                edge.a, edge.b
            );
        }
    }
    for link in &state.links {
        if !(vi_visible[link.from.index()] && vi_visible[link.to.index()]) {
            continue;
        }
        match link.kind {
            LinkKind::Succession => {
                let _ = writeln!(out, "  v{} -> v{};", link.from, link.to);
            }
            LinkKind::Coincidence => {
                let _ = writeln!(
                    out,
                    "  v{} -> v{} [style=bold, dir=none, label=\"coincidence\"];",
                    link.from, link.to
                );
            }
            LinkKind::Summarization => {
                let _ = writeln!(
                    out,
                    "  v{} -> v{} [style=dotted, label=\"summary\"];",
                    link.from, link.to
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executor::Executor;
    use crate::lexicon::Lexicon;
    use crate::parser::parse_story;

    fn run(text: &str) -> StoryState {
        let lex = Lexicon::with_defaults();
        let sentences = parse_story(text, &lex).unwrap();
        let parsed: Vec<_> = sentences.into_iter().map(|s| s.sentence).collect();
        let mut exec = Executor::new(&lex);
        exec.execute_story(&parsed).unwrap();
        exec.into_state()
    }

    #[test]
    fn empty_state_summary_and_dot() {
        let state = StoryState::new();
        let summary = summarize(&state);
        assert!(summary.scenes.is_empty());
        let text = summary.to_string();
        assert!(text.starts_with(SUMMARY_FORMAT));
        let dot = to_dot(&state, &DotOptions::default());
        assert!(dot.starts_with("digraph"));
        assert!(dot.ends_with("}\n"));
    }

    #[test]
    fn summary_shows_coincidence_pair() {
        let state = run(
            "An \"Achilles\" / exists.\nA \"Hector\" / exists.\n\"Achilles\" / owns / a sword.\n\
             \"Achilles\" / cuts / \"Hector\".\n\"Achilles\" / thus uses / the sword.",
        );
        let summary = summarize(&state);
        assert!(summary
            .coincidence_groups
            .iter()
            .any(|group| group.len() == 2));
        // repeated calls are byte-identical
        assert_eq!(summary.to_string(), summarize(&state).to_string());
    }

    #[test]
    fn json_round_trip_is_lossless_and_stable() {
        let state = run(
            "$NewSceneCurrent #Reality, none, man \"John\", cat, box\n\
             $NewScene #Attempt, fictional-future, man \"John\" -> man \"John\", cat -> cat, box -> box\n\
             \"John\" / tries in #Attempt // \"John\" / achieves.",
        );
        let json = to_json(&state);
        let reloaded = from_json(&json).unwrap();
        assert_eq!(state, reloaded);
        assert_eq!(to_json(&reloaded), json);
    }

    #[test]
    fn json_format_tag_is_checked() {
        let bad = to_json(&StoryState::new()).replace(STATE_FORMAT, "xapi-state/999");
        assert!(matches!(from_json(&bad), Err(ExportError::Format { .. })));
    }

    #[test]
    fn dot_renders_clusters_and_edge_styles() {
        let state = run(
            "$NewSceneCurrent #Reality, none, man \"John\", cat, box\n\
             $NewScene #Attempt, fictional-future, man \"John\" -> man \"John\", cat -> cat, box -> box\n\
             \"John\" / tries in #Attempt // \"John\" / achieves.\n\
             \"John\" / tries in #Attempt // The cat / thus is-inside / the box.",
        );
        let dot = to_dot(&state, &DotOptions::default());
        assert!(dot.contains("subgraph cluster_0"));
        assert!(dot.contains("subgraph cluster_1"));
        assert!(dot.contains("style=dashed"));
        assert!(dot.contains("style=bold"));
        assert!(dot.contains("label=\"quote\""));

        let filtered = to_dot(
            &state,
            &DotOptions {
                focus_only: false,
                scene_filter: vec!["Attempt".into()],
            },
        );
        assert!(!filtered.contains("cluster_0"));
        assert!(filtered.contains("cluster_1"));
    }
}
