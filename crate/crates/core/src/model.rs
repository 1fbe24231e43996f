//! The narrative data model: scenes, instances, verb instances, identity
//! edges, link edges, and the focus.
//!
//! A [`StoryState`] is owned by one executor and mutated sequentially; the
//! query operations (`identity_chain`, `coincidence_group`,
//! `focus_snapshot`) never mutate. Every collection is ordered, so
//! replaying a story yields an identical state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::VerbCategory;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Ordinal of a scene, assigned at creation.
    SceneId
);
id_type!(
    /// Ordinal of an instance, assigned at creation.
    InstanceId
);
id_type!(
    /// Ordinal of a verb instance, assigned at creation.
    ViId
);

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("unknown instance id {0}")]
    UnknownInstance(InstanceId),
    #[error("unknown verb instance id {0}")]
    UnknownVi(ViId),
    #[error("unknown scene id {0}")]
    UnknownScene(SceneId),
}

/// Number-sense class of a group instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Pair,
    Many,
}

/// A participant in exactly one scene, with a cumulative attribute set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: InstanceId,
    pub scene: SceneId,
    /// Ordered set; grows monotonically, never shrinks.
    pub attributes: Vec<String>,
    pub proper_name: Option<String>,
    pub in_focus: bool,
    pub group_kind: Option<GroupKind>,
    pub group_members: Vec<InstanceId>,
}

impl Instance {
    pub fn is_group(&self) -> bool {
        self.group_kind.is_some()
    }

    /// True when this instance's attributes and name subsume the words of
    /// a reference.
    pub fn matches(&self, attributes: &[String], name: Option<&str>) -> bool {
        if let Some(name) = name {
            if self.proper_name.as_deref() != Some(name) {
                return false;
            }
        }
        attributes
            .iter()
            .all(|a| self.attributes.iter().any(|have| have == a))
    }
}

/// Grammatical shape of an executed sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViForm {
    SV,
    SVO,
    SVAdj,
    Quote,
}

/// The executed form of one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbInstance {
    pub id: ViId,
    pub scene: SceneId,
    pub form: ViForm,
    pub subject: InstanceId,
    /// Base verb word; negation is carried by `negated`.
    pub verb: String,
    pub category: VerbCategory,
    pub negated: bool,
    pub object: Option<InstanceId>,
    pub adjectives: Vec<String>,
    pub quoted_vi: Option<ViId>,
    /// Verbatim payload of an `utters` sentence.
    pub text: Option<String>,
    pub labels: Vec<String>,
    pub in_focus: bool,
    /// Position in the scene's action sequence; `None` for VIs that stay
    /// in focus until superseded (relations, attributes).
    pub action_seq: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Succession,
    Coincidence,
    Summarization,
}

/// A typed link between two verb instances. Coincidence edges are stored
/// once and queried in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkEdge {
    pub kind: LinkKind,
    pub from: ViId,
    pub to: ViId,
}

/// An undirected identity edge; endpoints are stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityEdge {
    pub a: InstanceId,
    pub b: InstanceId,
}

impl IdentityEdge {
    pub fn new(x: InstanceId, y: InstanceId) -> IdentityEdge {
        if x.0 <= y.0 {
            IdentityEdge { a: x, b: y }
        } else {
            IdentityEdge { a: y, b: x }
        }
    }

    pub fn touches(&self, id: InstanceId) -> Option<InstanceId> {
        if self.a == id {
            Some(self.b)
        } else if self.b == id {
            Some(self.a)
        } else {
            None
        }
    }
}

/// A typed relation from one scene to another (e.g. `fictional-future`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRelation {
    pub verb: String,
    pub target: SceneId,
}

/// A container of instances and VIs: one plane of interpretation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: SceneId,
    pub label: Option<String>,
    pub members: Vec<InstanceId>,
    pub vis: Vec<ViId>,
    pub relations: Vec<SceneRelation>,
    pub is_current: bool,
    /// Running count of windowed (action-like) VIs executed here.
    pub action_count: u32,
    /// The most recently executed VI; successor edges start here.
    pub last_vi: Option<ViId>,
}

/// Read-only view of what is currently in focus, per scene.
#[derive(Debug, Clone, PartialEq)]
pub struct FocusSnapshot {
    pub scenes: Vec<SceneFocus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneFocus {
    pub scene: SceneId,
    pub label: Option<String>,
    pub instances: Vec<InstanceId>,
    pub vis: Vec<ViId>,
}

/// The complete state of one story run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StoryState {
    pub scenes: Vec<Scene>,
    pub instances: Vec<Instance>,
    pub vis: Vec<VerbInstance>,
    pub identity_edges: Vec<IdentityEdge>,
    pub links: Vec<LinkEdge>,
    /// Story-scoped VI labels (`#A`), last binding wins.
    pub labels: BTreeMap<String, ViId>,
    pub current_scene: Option<SceneId>,
}

impl StoryState {
    pub fn new() -> StoryState {
        StoryState::default()
    }

    pub fn scene(&self, id: SceneId) -> Result<&Scene, ModelError> {
        self.scenes.get(id.index()).ok_or(ModelError::UnknownScene(id))
    }

    pub fn scene_mut(&mut self, id: SceneId) -> &mut Scene {
        &mut self.scenes[id.index()]
    }

    pub fn instance(&self, id: InstanceId) -> Result<&Instance, ModelError> {
        self.instances
            .get(id.index())
            .ok_or(ModelError::UnknownInstance(id))
    }

    pub fn instance_mut(&mut self, id: InstanceId) -> &mut Instance {
        &mut self.instances[id.index()]
    }

    pub fn vi(&self, id: ViId) -> Result<&VerbInstance, ModelError> {
        self.vis.get(id.index()).ok_or(ModelError::UnknownVi(id))
    }

    pub fn vi_mut(&mut self, id: ViId) -> &mut VerbInstance {
        &mut self.vis[id.index()]
    }

    pub fn add_scene(&mut self, label: Option<String>) -> SceneId {
        let id = SceneId(self.scenes.len() as u32);
        self.scenes.push(Scene {
            id,
            label,
            members: Vec::new(),
            vis: Vec::new(),
            relations: Vec::new(),
            is_current: false,
            action_count: 0,
            last_vi: None,
        });
        id
    }

    /// Find a scene by `#label`, or by quoted name ignoring case.
    pub fn scene_by_label(&self, label: &str) -> Option<SceneId> {
        self.scenes
            .iter()
            .find(|s| s.label.as_deref() == Some(label))
            .map(|s| s.id)
            .or_else(|| {
                self.scenes
                    .iter()
                    .find(|s| {
                        s.label
                            .as_deref()
                            .map(|l| l.eq_ignore_ascii_case(label))
                            .unwrap_or(false)
                    })
                    .map(|s| s.id)
            })
    }

    /// Switch the current scene; exactly one scene is current afterwards.
    pub fn set_current_scene(&mut self, id: SceneId) {
        for scene in &mut self.scenes {
            scene.is_current = scene.id == id;
        }
        self.current_scene = Some(id);
    }

    pub fn add_instance(
        &mut self,
        scene: SceneId,
        attributes: Vec<String>,
        proper_name: Option<String>,
        group_kind: Option<GroupKind>,
    ) -> InstanceId {
        let id = InstanceId(self.instances.len() as u32);
        self.instances.push(Instance {
            id,
            scene,
            attributes,
            proper_name,
            in_focus: true,
            group_kind,
            group_members: Vec::new(),
        });
        self.scene_mut(scene).members.push(id);
        id
    }

    pub fn add_vi(&mut self, mut vi: VerbInstance) -> ViId {
        let id = ViId(self.vis.len() as u32);
        vi.id = id;
        let scene = vi.scene;
        self.vis.push(vi);
        self.scene_mut(scene).vis.push(id);
        id
    }

    /// Record an identity edge; duplicates are ignored.
    pub fn add_identity_edge(&mut self, x: InstanceId, y: InstanceId) -> Option<IdentityEdge> {
        let edge = IdentityEdge::new(x, y);
        if edge.a == edge.b || self.identity_edges.contains(&edge) {
            return None;
        }
        self.identity_edges.push(edge);
        Some(edge)
    }

    pub fn add_link(&mut self, kind: LinkKind, from: ViId, to: ViId) -> LinkEdge {
        let edge = LinkEdge { kind, from, to };
        self.links.push(edge);
        edge
    }

    /// The connected component of identity edges containing `id`, ordered
    /// by creation id. An instance with no edges is its own chain.
    pub fn identity_chain(&self, id: InstanceId) -> Result<Vec<InstanceId>, ModelError> {
        self.instance(id)?;
        let mut component = vec![id];
        let mut frontier = vec![id];
        while let Some(node) = frontier.pop() {
            for edge in &self.identity_edges {
                if let Some(other) = edge.touches(node) {
                    if !component.contains(&other) {
                        component.push(other);
                        frontier.push(other);
                    }
                }
            }
        }
        component.sort();
        Ok(component)
    }

    /// Transitive closure of coincidence edges including `id`.
    pub fn coincidence_group(&self, id: ViId) -> Result<Vec<ViId>, ModelError> {
        self.vi(id)?;
        let mut group = vec![id];
        let mut frontier = vec![id];
        while let Some(node) = frontier.pop() {
            for edge in &self.links {
                if edge.kind != LinkKind::Coincidence {
                    continue;
                }
                let other = if edge.from == node {
                    Some(edge.to)
                } else if edge.to == node {
                    Some(edge.from)
                } else {
                    None
                };
                if let Some(other) = other {
                    if !group.contains(&other) {
                        group.push(other);
                        frontier.push(other);
                    }
                }
            }
        }
        group.sort();
        Ok(group)
    }

    /// All coincidence equivalence classes, each sorted, ordered by their
    /// smallest VI id.
    pub fn coincidence_groups(&self) -> Vec<Vec<ViId>> {
        let mut seen = vec![false; self.vis.len()];
        let mut groups = Vec::new();
        for vi in &self.vis {
            if seen[vi.id.index()] {
                continue;
            }
            let group = self.coincidence_group(vi.id).expect("vi exists");
            for id in &group {
                seen[id.index()] = true;
            }
            groups.push(group);
        }
        groups
    }

    /// All identity components with at least two members, ordered by their
    /// smallest instance id.
    pub fn identity_chains(&self) -> Vec<Vec<InstanceId>> {
        let mut seen = vec![false; self.instances.len()];
        let mut chains = Vec::new();
        for instance in &self.instances {
            if seen[instance.id.index()] {
                continue;
            }
            let chain = self.identity_chain(instance.id).expect("instance exists");
            for id in &chain {
                seen[id.index()] = true;
            }
            if chain.len() >= 2 {
                chains.push(chain);
            }
        }
        chains
    }

    /// Read-only listing of in-focus instances and VIs per scene.
    pub fn focus_snapshot(&self) -> FocusSnapshot {
        FocusSnapshot {
            scenes: self
                .scenes
                .iter()
                .map(|scene| SceneFocus {
                    scene: scene.id,
                    label: scene.label.clone(),
                    instances: scene
                        .members
                        .iter()
                        .copied()
                        .filter(|id| self.instances[id.index()].in_focus)
                        .collect(),
                    vis: scene
                        .vis
                        .iter()
                        .copied()
                        .filter(|id| self.vis[id.index()].in_focus)
                        .collect(),
                })
                .collect(),
        }
    }

    /// Most recently created in-focus instance of `scene` matching the
    /// given words; recency wins on ambiguity.
    pub fn find_instance(
        &self,
        scene: SceneId,
        attributes: &[String],
        name: Option<&str>,
        exclude: &[InstanceId],
    ) -> Option<InstanceId> {
        let scene = self.scenes.get(scene.index())?;
        scene
            .members
            .iter()
            .rev()
            .copied()
            .filter(|id| !exclude.contains(id))
            .find(|id| {
                let instance = &self.instances[id.index()];
                instance.in_focus && instance.matches(attributes, name)
            })
    }

    /// The group instance in `scene` whose member set equals `members`.
    pub fn find_group(&self, scene: SceneId, members: &[InstanceId]) -> Option<InstanceId> {
        let mut wanted: Vec<InstanceId> = members.to_vec();
        wanted.sort();
        self.scenes[scene.index()]
            .members
            .iter()
            .rev()
            .copied()
            .find(|id| {
                let instance = &self.instances[id.index()];
                if !instance.is_group() || !instance.in_focus {
                    return false;
                }
                let mut have = instance.group_members.clone();
                have.sort();
                have == wanted
            })
    }

    /// In-focus VIs of a scene, most recent first.
    pub fn focus_vis_recent_first(&self, scene: SceneId) -> impl Iterator<Item = &VerbInstance> {
        self.scenes[scene.index()]
            .vis
            .iter()
            .rev()
            .map(|id| &self.vis[id.index()])
            .filter(|vi| vi.in_focus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_with_scene() -> (StoryState, SceneId) {
        let mut state = StoryState::new();
        let scene = state.add_scene(Some("Test".into()));
        state.set_current_scene(scene);
        (state, scene)
    }

    #[test]
    fn singleton_identity_chain() {
        let (mut state, scene) = state_with_scene();
        let a = state.add_instance(scene, vec!["apple".into()], None, None);
        assert_eq!(state.identity_chain(a).unwrap(), vec![a]);
    }

    #[test]
    fn identity_chain_orders_by_creation() {
        let (mut state, scene) = state_with_scene();
        let a = state.add_instance(scene, vec!["speck".into()], None, None);
        let b = state.add_instance(scene, vec!["mirage".into()], None, None);
        let c = state.add_instance(scene, vec!["man".into()], None, None);
        state.add_identity_edge(b, c);
        state.add_identity_edge(b, a);
        assert_eq!(state.identity_chain(c).unwrap(), vec![a, b, c]);
        // duplicate and self edges are ignored
        assert!(state.add_identity_edge(c, b).is_none());
        assert!(state.add_identity_edge(a, a).is_none());
        assert_eq!(state.identity_edges.len(), 2);
    }

    #[test]
    fn unknown_ids_are_errors() {
        let state = StoryState::new();
        assert_eq!(
            state.identity_chain(InstanceId(3)),
            Err(ModelError::UnknownInstance(InstanceId(3)))
        );
        assert_eq!(
            state.coincidence_group(ViId(0)),
            Err(ModelError::UnknownVi(ViId(0)))
        );
    }

    #[test]
    fn coincidence_closure_is_transitive() {
        let (mut state, scene) = state_with_scene();
        let subject = state.add_instance(scene, vec!["man".into()], None, None);
        let mk = |state: &mut StoryState, verb: &str| {
            state.add_vi(VerbInstance {
                id: ViId(0),
                scene,
                form: ViForm::SV,
                subject,
                verb: verb.into(),
                category: VerbCategory::Action,
                negated: false,
                object: None,
                adjectives: vec![],
                quoted_vi: None,
                text: None,
                labels: vec![],
                in_focus: true,
                action_seq: None,
            })
        };
        let a = mk(&mut state, "gives");
        let b = mk(&mut state, "receives");
        let c = mk(&mut state, "laughs");
        state.add_link(LinkKind::Coincidence, b, a);
        state.add_link(LinkKind::Coincidence, c, b);
        assert_eq!(state.coincidence_group(a).unwrap(), vec![a, b, c]);
        assert_eq!(state.coincidence_group(c).unwrap(), vec![a, b, c]);
        assert_eq!(state.coincidence_groups(), vec![vec![a, b, c]]);
    }

    #[test]
    fn empty_story_has_empty_snapshot() {
        let state = StoryState::new();
        assert!(state.focus_snapshot().scenes.is_empty());
    }

    #[test]
    fn focus_snapshot_filters_defocused() {
        let (mut state, scene) = state_with_scene();
        let a = state.add_instance(scene, vec!["speck".into()], None, None);
        let b = state.add_instance(scene, vec!["man".into()], None, None);
        state.instance_mut(a).in_focus = false;
        let snap = state.focus_snapshot();
        assert_eq!(snap.scenes.len(), 1);
        assert_eq!(snap.scenes[0].instances, vec![b]);
    }

    #[test]
    fn recency_wins_on_reference_match() {
        let (mut state, scene) = state_with_scene();
        let _old = state.add_instance(scene, vec!["apple".into()], None, None);
        let new = state.add_instance(scene, vec!["apple".into()], None, None);
        assert_eq!(
            state.find_instance(scene, &["apple".into()], None, &[]),
            Some(new)
        );
        // exclusion lets group parts pick distinct twins
        let first = state
            .find_instance(scene, &["apple".into()], None, &[])
            .unwrap();
        let second = state
            .find_instance(scene, &["apple".into()], None, &[first])
            .unwrap();
        assert_ne!(first, second);
    }

    #[test]
    fn scene_lookup_by_name_is_case_insensitive() {
        let mut state = StoryState::new();
        let plan = state.add_scene(Some("Plan".into()));
        assert_eq!(state.scene_by_label("Plan"), Some(plan));
        assert_eq!(state.scene_by_label("plan"), Some(plan));
        assert_eq!(state.scene_by_label("missing"), None);
    }
}
