//! Executes parsed sentences against a [`StoryState`].
//!
//! Execution is strictly sequential per story: succession links, the thus
//! anchor, and the focus window all depend on order. The executor owns its
//! state; distinct stories run in isolated executors.

use thiserror::Error;

use crate::ast::{
    Article, ClausePayload, ClauseSentence, MacroKind, MacroMember, MacroSpec, ParsedSentence,
    ReferenceExpr, SentenceForm, ThusMarker,
};
use crate::lexicon::{Lexicon, VerbCategory, VerbEntry};
use crate::model::{
    GroupKind, IdentityEdge, InstanceId, LinkEdge, LinkKind, ModelError, SceneId, SceneRelation,
    StoryState, VerbInstance, ViForm, ViId,
};

#[derive(Debug, Error, PartialEq)]
pub enum ExecError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no in-focus instance matches `{reference}`")]
    NoMatch { reference: String },
    #[error("no active relation provides `{words}` of the target")]
    NoActiveRelation { words: String },
    #[error("unknown scene `{label}`")]
    UnknownScene { label: String },
    #[error("scene label `{label}` already exists")]
    DuplicateSceneLabel { label: String },
    #[error("clone target scene `{label}` already exists")]
    CloneTargetExists { label: String },
    #[error("`thus` needs a prior in-focus verb instance in the same scene")]
    NoThusAnchor,
    #[error("`thus #{label}` refers to an unbound label")]
    UnknownThusLabel { label: String },
    #[error("`thus #{label}` anchor is no longer in focus")]
    ThusAnchorDefocused { label: String },
    #[error("attribute `{new}` excludes existing `{existing}`; use `changes` to replace the instance")]
    IncompatibleAttribute { new: String, existing: String },
    #[error("pronoun `{pronoun}` is only valid inside a quoted sentence")]
    PronounOutsideQuote { pronoun: String },
    #[error("pronoun `{pronoun}` has no counterpart in the quote scene")]
    PronounNoCounterpart { pronoun: String },
    #[error("membership verb `{verb}` needs a group instance as its object")]
    MembershipNeedsGroup { verb: String },
    #[error("pair group already has two members")]
    PairFull,
    #[error("`is-identical` endpoints are in the same scene; identity within a scene only arises from `changes`")]
    SameSceneIdentity,
    #[error("verb `{verb}` is not registered")]
    UnknownVerb { verb: String },
    #[error("a {form} row cannot be executed outside its macro")]
    NotExecutable { form: SentenceForm },
    #[error("scene reference is not a valid {role}")]
    SceneRefNotAllowed { role: &'static str },
    #[error("verb `{verb}` needs a scene subject")]
    NeedsSceneSubject { verb: String },
    #[error("scene-relation verb `{verb}` needs a scene object")]
    NeedsSceneObject { verb: String },
    #[error("verb `{verb}` cannot take a scene subject")]
    SceneSubjectNotAllowed { verb: String },
    #[error("`utters` needs a `text \"...\"` object")]
    UtterNeedsText,
    #[error("text literal object is only valid with an utter verb")]
    TextLiteralNotAllowed,
    #[error("quoted sentence must be an ordinary sentence")]
    BadQuoteBody,
    #[error("arrow source unresolvable: {0}")]
    ArrowSource(String),
    #[error("sentence {index}: {source}")]
    AtSentence {
        index: usize,
        #[source]
        source: Box<ExecError>,
    },
}

/// Error handling mode for [`Executor::execute_story`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// First error aborts, annotated with the sentence index.
    #[default]
    Strict,
    /// Failing sentences are skipped and recorded in the trace.
    Lenient,
}

#[derive(Debug, Clone, Copy)]
pub struct ExecConfig {
    pub mode: ExecMode,
    /// An action VI stays in focus for this many subsequent action VIs in
    /// its scene.
    pub focus_window: u32,
}

impl Default for ExecConfig {
    fn default() -> ExecConfig {
        ExecConfig {
            mode: ExecMode::Strict,
            focus_window: 10,
        }
    }
}

/// What one sentence did to the state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentenceRecord {
    pub created_scenes: Vec<SceneId>,
    pub created_instances: Vec<InstanceId>,
    pub created_vis: Vec<ViId>,
    pub created_identity_edges: Vec<IdentityEdge>,
    pub created_links: Vec<LinkEdge>,
    /// Resolved references as (role, instance) pairs.
    pub resolved: Vec<(String, InstanceId)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SentenceOutcome {
    Executed(SentenceRecord),
    /// Lenient mode only: the sentence failed and was skipped.
    Skipped { error: String },
}

/// Per-sentence records; one entry per input sentence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExecutionTrace {
    pub sentences: Vec<SentenceOutcome>,
}

impl ExecutionTrace {
    pub fn skipped(&self) -> usize {
        self.sentences
            .iter()
            .filter(|s| matches!(s, SentenceOutcome::Skipped { .. }))
            .count()
    }
}

#[derive(Clone, Copy)]
struct QuoteCtx {
    outer_subject: InstanceId,
}

pub struct Executor<'l> {
    lexicon: &'l Lexicon,
    pub state: StoryState,
    config: ExecConfig,
}

impl<'l> Executor<'l> {
    pub fn new(lexicon: &'l Lexicon) -> Executor<'l> {
        Executor::with_config(lexicon, ExecConfig::default())
    }

    pub fn with_config(lexicon: &'l Lexicon, config: ExecConfig) -> Executor<'l> {
        Executor {
            lexicon,
            state: StoryState::new(),
            config,
        }
    }

    pub fn into_state(self) -> StoryState {
        self.state
    }

    /// Execute sentences in order. Strict mode aborts on the first error;
    /// lenient mode skips failing sentences and records them.
    pub fn execute_story(
        &mut self,
        sentences: &[ParsedSentence],
    ) -> Result<ExecutionTrace, ExecError> {
        let mut trace = ExecutionTrace::default();
        for (index, sentence) in sentences.iter().enumerate() {
            match self.execute_sentence(sentence) {
                Ok(record) => trace.sentences.push(SentenceOutcome::Executed(record)),
                Err(error) => match self.config.mode {
                    ExecMode::Strict => {
                        return Err(ExecError::AtSentence {
                            index,
                            source: Box::new(error),
                        })
                    }
                    ExecMode::Lenient => trace.sentences.push(SentenceOutcome::Skipped {
                        error: error.to_string(),
                    }),
                },
            }
        }
        Ok(trace)
    }

    pub fn execute_sentence(
        &mut self,
        sentence: &ParsedSentence,
    ) -> Result<SentenceRecord, ExecError> {
        let mut record = SentenceRecord::default();
        match sentence {
            ParsedSentence::SceneMacro(spec) => self.scene_macro(spec, &mut record)?,
            ParsedSentence::MacroRow(_) => {
                return Err(ExecError::NotExecutable {
                    form: SentenceForm::IdentityMacroRow,
                })
            }
            ParsedSentence::Clause(clause) => {
                self.clause(clause, None, None, &mut record)?;
            }
        }
        Ok(record)
    }

    fn ensure_current_scene(&mut self, record: &mut SentenceRecord) -> SceneId {
        match self.state.current_scene {
            Some(id) => id,
            None => {
                let id = self.state.add_scene(None);
                self.state.set_current_scene(id);
                record.created_scenes.push(id);
                id
            }
        }
    }

    fn verb_entry(&self, word: &str) -> Result<VerbEntry, ExecError> {
        self.lexicon.verb(word).ok_or(ExecError::UnknownVerb {
            verb: word.to_string(),
        })
    }

    /// Execute one clause. Returns the created VI, or `None` for scene
    /// sentences, which have effects but no VI.
    fn clause(
        &mut self,
        clause: &ClauseSentence,
        scene_ctx: Option<SceneId>,
        quote_ctx: Option<QuoteCtx>,
        record: &mut SentenceRecord,
    ) -> Result<Option<ViId>, ExecError> {
        let entry = self.verb_entry(&clause.verb)?;
        if clause.subject.is_scene_ref {
            self.scene_sentence(clause, &entry, record)?;
            return Ok(None);
        }
        if entry.category == VerbCategory::MetaScene {
            return Err(ExecError::NeedsSceneSubject {
                verb: clause.verb.clone(),
            });
        }

        let scene = match scene_ctx {
            Some(id) => id,
            None => self.ensure_current_scene(record),
        };
        let subject = self.resolve(&clause.subject, scene, quote_ctx, "subject", record)?;

        let vi = match entry.category {
            VerbCategory::Attribute => self.is_a(clause, &entry, scene, subject, record)?,
            VerbCategory::Change => self.change(clause, &entry, scene, subject, quote_ctx, record)?,
            VerbCategory::Identity => self.identity(clause, &entry, scene, subject, quote_ctx, record)?,
            VerbCategory::Relation | VerbCategory::RelationTerminating => {
                self.relation(clause, &entry, scene, subject, quote_ctx, record)?
            }
            VerbCategory::Quote => self.quote_sentence(clause, &entry, subject, record)?,
            VerbCategory::Utter => self.utterance(clause, &entry, scene, subject, record)?,
            VerbCategory::Exists
            | VerbCategory::Action
            | VerbCategory::Uses
            | VerbCategory::Achieves
            | VerbCategory::Summary => self.action(clause, &entry, scene, subject, quote_ctx, record)?,
            VerbCategory::MetaScene => unreachable!("handled above"),
        };
        Ok(Some(vi))
    }

    // ---- reference resolution -------------------------------------------

    fn resolve(
        &mut self,
        reference: &ReferenceExpr,
        scene: SceneId,
        quote_ctx: Option<QuoteCtx>,
        role: &str,
        record: &mut SentenceRecord,
    ) -> Result<InstanceId, ExecError> {
        let id = self.resolve_excluding(reference, scene, quote_ctx, record, &mut Vec::new())?;
        record.resolved.push((role.to_string(), id));
        Ok(id)
    }

    fn resolve_excluding(
        &mut self,
        reference: &ReferenceExpr,
        scene: SceneId,
        quote_ctx: Option<QuoteCtx>,
        record: &mut SentenceRecord,
        taken: &mut Vec<InstanceId>,
    ) -> Result<InstanceId, ExecError> {
        if reference.is_scene_ref {
            return Err(ExecError::SceneRefNotAllowed { role: "reference" });
        }
        if reference.is_text_literal.is_some() {
            return Err(ExecError::TextLiteralNotAllowed);
        }
        if let Some(pronoun) = &reference.pronoun {
            return self.resolve_pronoun(pronoun, scene, quote_ctx);
        }
        if reference.is_group() {
            let mut members = Vec::new();
            for part in &reference.group_parts {
                let id = self.resolve_excluding(part, scene, quote_ctx, record, taken)?;
                taken.push(id);
                members.push(id);
            }
            return Ok(self.find_or_create_group(scene, &members, record));
        }

        // `X -- in -- "scene"` switches the scene the words resolve in
        let scene = match &reference.scene_qualifier {
            Some(label) => self
                .state
                .scene_by_label(label)
                .ok_or(ExecError::UnknownScene {
                    label: label.clone(),
                })?,
            None => scene,
        };

        if let Some((_, target)) = &reference.relation_path {
            let owner = self.resolve_excluding(target, scene, quote_ctx, record, taken)?;
            return self.follow_relation(owner, &reference.attributes);
        }

        match reference.article {
            Article::Indefinite => {
                let id = self.create_instance(
                    scene,
                    &reference.attributes,
                    reference.proper_name.clone(),
                    record,
                )?;
                Ok(id)
            }
            Article::Definite | Article::None => self
                .state
                .find_instance(
                    scene,
                    &reference.attributes,
                    reference.proper_name.as_deref(),
                    taken,
                )
                .ok_or_else(|| ExecError::NoMatch {
                    reference: crate::printer::print_reference(reference),
                }),
        }
    }

    fn resolve_pronoun(
        &self,
        pronoun: &str,
        scene: SceneId,
        quote_ctx: Option<QuoteCtx>,
    ) -> Result<InstanceId, ExecError> {
        let ctx = quote_ctx.ok_or_else(|| ExecError::PronounOutsideQuote {
            pronoun: pronoun.to_string(),
        })?;
        let chain = self.state.identity_chain(ctx.outer_subject)?;
        if let Some(id) = chain
            .iter()
            .rev()
            .copied()
            .find(|id| self.state.instances[id.index()].scene == scene)
        {
            return Ok(id);
        }
        let outer_name = self.state.instances[ctx.outer_subject.index()]
            .proper_name
            .clone();
        if let Some(name) = outer_name {
            if let Some(id) = self.state.find_instance(scene, &[], Some(&name), &[]) {
                return Ok(id);
            }
        }
        Err(ExecError::PronounNoCounterpart {
            pronoun: pronoun.to_string(),
        })
    }

    fn create_instance(
        &mut self,
        scene: SceneId,
        attributes: &[String],
        proper_name: Option<String>,
        record: &mut SentenceRecord,
    ) -> Result<InstanceId, ExecError> {
        let attributes = self.lexicon.implied_closure(attributes);
        for (i, a) in attributes.iter().enumerate() {
            for b in &attributes[i + 1..] {
                if self.lexicon.excluded(a, b) {
                    return Err(ExecError::IncompatibleAttribute {
                        new: b.clone(),
                        existing: a.clone(),
                    });
                }
            }
        }
        let group_kind = group_kind_of(&attributes);
        let id = self
            .state
            .add_instance(scene, attributes, proper_name, group_kind);
        record.created_instances.push(id);
        Ok(id)
    }

    /// `the X -- of -- Y`: follow an in-focus relation VI whose subject is
    /// the resolved target and whose object matches the head words.
    fn follow_relation(
        &self,
        owner: InstanceId,
        words: &[String],
    ) -> Result<InstanceId, ExecError> {
        self.state
            .vis
            .iter()
            .rev()
            .filter(|vi| {
                vi.in_focus
                    && vi.category == VerbCategory::Relation
                    && !vi.negated
                    && vi.subject == owner
            })
            .filter_map(|vi| vi.object)
            .find(|object| self.state.instances[object.index()].matches(words, None))
            .ok_or_else(|| ExecError::NoActiveRelation {
                words: words.join(" "),
            })
    }

    fn find_or_create_group(
        &mut self,
        scene: SceneId,
        members: &[InstanceId],
        record: &mut SentenceRecord,
    ) -> InstanceId {
        if let Some(id) = self.state.find_group(scene, members) {
            return id;
        }
        let kind = if members.len() == 2 {
            GroupKind::Pair
        } else {
            GroupKind::Many
        };
        let word = match kind {
            GroupKind::Pair => "pair",
            GroupKind::Many => "many",
        };
        let id = self
            .state
            .add_instance(scene, vec![word.to_string()], None, Some(kind));
        self.state.instance_mut(id).group_members = members.to_vec();
        record.created_instances.push(id);
        id
    }

    // ---- verb instance emission ------------------------------------------

    #[allow(clippy::too_many_arguments)]
    fn emit_vi(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        scene: SceneId,
        form: ViForm,
        subject: InstanceId,
        object: Option<InstanceId>,
        adjectives: Vec<String>,
        quoted_vi: Option<ViId>,
        text: Option<String>,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        // the anchor is validated against the focus before this VI arrives
        let anchor = match &clause.thus {
            None => None,
            Some(ThusMarker::Bare) => Some(
                self.state
                    .focus_vis_recent_first(scene)
                    .next()
                    .ok_or(ExecError::NoThusAnchor)?
                    .id,
            ),
            Some(ThusMarker::Labeled(label)) => {
                let id = *self
                    .state
                    .labels
                    .get(label)
                    .ok_or_else(|| ExecError::UnknownThusLabel {
                        label: label.clone(),
                    })?;
                if !self.state.vis[id.index()].in_focus {
                    return Err(ExecError::ThusAnchorDefocused {
                        label: label.clone(),
                    });
                }
                Some(id)
            }
        };
        let succession_from = if clause.thus.is_none() {
            self.state.scenes[scene.index()].last_vi
        } else {
            None
        };

        // relation VIs persist until superseded: a new relation with the
        // same base verb and subject defocuses the old one
        if entry.category == VerbCategory::Relation {
            let ids: Vec<ViId> = self
                .state
                .focus_vis_recent_first(scene)
                .filter(|vi| {
                    vi.category == VerbCategory::Relation
                        && vi.verb == entry.base_word()
                        && vi.subject == subject
                })
                .map(|vi| vi.id)
                .collect();
            for id in ids {
                self.state.vi_mut(id).in_focus = false;
            }
        }

        let windowed = !matches!(
            entry.category,
            VerbCategory::Relation | VerbCategory::Attribute
        );
        let action_seq = if windowed {
            let scene_mut = self.state.scene_mut(scene);
            scene_mut.action_count += 1;
            Some(scene_mut.action_count)
        } else {
            None
        };

        let labels = clause.verb_label.iter().cloned().collect::<Vec<_>>();
        let vi = VerbInstance {
            id: ViId(0),
            scene,
            form,
            subject,
            verb: entry.base_word().to_string(),
            category: entry.category,
            negated: entry.negated,
            object,
            adjectives,
            quoted_vi,
            text,
            labels: labels.clone(),
            in_focus: true,
            action_seq,
        };
        let id = self.state.add_vi(vi);
        record.created_vis.push(id);
        for label in labels {
            self.state.labels.insert(label, id);
        }

        if let Some(prev) = succession_from {
            record
                .created_links
                .push(self.state.add_link(LinkKind::Succession, prev, id));
        }
        if let Some(anchor) = anchor {
            record
                .created_links
                .push(self.state.add_link(LinkKind::Coincidence, id, anchor));
        }
        self.state.scene_mut(scene).last_vi = Some(id);

        // age out action VIs that slipped past the focus window
        if let Some(count) = action_seq {
            let window = self.config.focus_window;
            let expired: Vec<ViId> = self.state.scenes[scene.index()]
                .vis
                .iter()
                .copied()
                .filter(|vid| {
                    let vi = &self.state.vis[vid.index()];
                    vi.in_focus
                        && vi
                            .action_seq
                            .map(|seq| count.saturating_sub(seq) >= window)
                            .unwrap_or(false)
                })
                .collect();
            for vid in expired {
                self.state.vi_mut(vid).in_focus = false;
            }
        }

        if clause.in_summary {
            self.add_summarization_edges(id, scene, subject, record)?;
        }
        Ok(id)
    }

    /// Summarization edges go to every in-focus VI of the scene that shares
    /// a participant (through identity chains) with the summary's subject
    /// group.
    fn add_summarization_edges(
        &mut self,
        summary: ViId,
        scene: SceneId,
        subject: InstanceId,
        record: &mut SentenceRecord,
    ) -> Result<(), ExecError> {
        let mut participants = vec![subject];
        participants.extend(self.state.instances[subject.index()].group_members.iter());
        let mut closure = Vec::new();
        for p in participants {
            for id in self.state.identity_chain(p)? {
                if !closure.contains(&id) {
                    closure.push(id);
                }
            }
        }
        let targets: Vec<ViId> = self.state.scenes[scene.index()]
            .vis
            .iter()
            .copied()
            .filter(|id| *id != summary)
            .filter(|id| {
                let vi = &self.state.vis[id.index()];
                vi.in_focus
                    && (closure.contains(&vi.subject)
                        || vi.object.map(|o| closure.contains(&o)).unwrap_or(false))
            })
            .collect();
        for target in targets {
            record
                .created_links
                .push(self.state.add_link(LinkKind::Summarization, summary, target));
        }
        Ok(())
    }

    // ---- per-category execution -------------------------------------------

    fn is_a(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        scene: SceneId,
        subject: InstanceId,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        let adjectives = match &clause.payload {
            ClausePayload::Adjectives(words) => words.clone(),
            _ => Vec::new(),
        };
        // discovery, not change: additions must be compatible
        let additions = self.lexicon.implied_closure(&adjectives);
        for word in &additions {
            let existing = self.state.instances[subject.index()]
                .attributes
                .iter()
                .find(|have| self.lexicon.excluded(word, have));
            if let Some(existing) = existing {
                return Err(ExecError::IncompatibleAttribute {
                    new: word.clone(),
                    existing: existing.clone(),
                });
            }
            let instance = self.state.instance_mut(subject);
            if !instance.attributes.contains(word) {
                instance.attributes.push(word.clone());
            }
        }
        self.emit_vi(
            clause,
            entry,
            scene,
            ViForm::SVAdj,
            subject,
            None,
            adjectives,
            None,
            None,
            record,
        )
    }

    fn change(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        scene: SceneId,
        subject: InstanceId,
        quote_ctx: Option<QuoteCtx>,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        let target = match &clause.payload {
            ClausePayload::Object(reference) => reference,
            _ => {
                return Err(ExecError::NoMatch {
                    reference: "change target".into(),
                })
            }
        };
        let subject_scene = self.state.instances[subject.index()].scene;

        let new_id = if target.is_group() {
            // `changes / a X + a Y`: fresh members plus the group; the
            // identity edge connects the old instance to the group
            let mut taken = Vec::new();
            let mut members = Vec::new();
            for part in &target.group_parts {
                let id =
                    self.resolve_excluding(part, subject_scene, quote_ctx, record, &mut taken)?;
                taken.push(id);
                members.push(id);
            }
            self.find_or_create_group(subject_scene, &members, record)
        } else {
            let news = self.lexicon.implied_closure(&target.attributes);
            for (i, a) in news.iter().enumerate() {
                for b in &news[i + 1..] {
                    if self.lexicon.excluded(a, b) {
                        return Err(ExecError::IncompatibleAttribute {
                            new: b.clone(),
                            existing: a.clone(),
                        });
                    }
                }
            }
            let old = &self.state.instances[subject.index()];
            // attributes carry over unless excluded by the new ones; a
            // group subject contributes nothing to its replacement
            let mut attributes: Vec<String> = if old.is_group() {
                Vec::new()
            } else {
                old.attributes
                    .iter()
                    .filter(|have| !news.iter().any(|new| self.lexicon.excluded(new, have)))
                    .cloned()
                    .collect()
            };
            for word in &news {
                if !attributes.contains(word) {
                    attributes.push(word.clone());
                }
            }
            let name = target
                .proper_name
                .clone()
                .or_else(|| if old.is_group() { None } else { old.proper_name.clone() });
            let group_kind = group_kind_of(&attributes);
            let id = self
                .state
                .add_instance(subject_scene, attributes, name, group_kind);
            record.created_instances.push(id);
            id
        };

        if let Some(edge) = self.state.add_identity_edge(subject, new_id) {
            record.created_identity_edges.push(edge);
        }
        self.state.instance_mut(subject).in_focus = false;

        self.emit_vi(
            clause,
            entry,
            scene,
            ViForm::SVO,
            subject,
            Some(new_id),
            Vec::new(),
            None,
            None,
            record,
        )
    }

    fn identity(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        scene: SceneId,
        subject: InstanceId,
        quote_ctx: Option<QuoteCtx>,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        let object = match &clause.payload {
            ClausePayload::Object(reference) => {
                self.resolve(reference, scene, quote_ctx, "object", record)?
            }
            _ => {
                return Err(ExecError::NoMatch {
                    reference: "identity target".into(),
                })
            }
        };
        let same_scene =
            self.state.instances[subject.index()].scene == self.state.instances[object.index()].scene;
        if same_scene {
            return Err(ExecError::SameSceneIdentity);
        }
        if let Some(edge) = self.state.add_identity_edge(subject, object) {
            record.created_identity_edges.push(edge);
        }
        self.emit_vi(
            clause,
            entry,
            scene,
            ViForm::SVO,
            subject,
            Some(object),
            Vec::new(),
            None,
            None,
            record,
        )
    }

    fn relation(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        scene: SceneId,
        subject: InstanceId,
        quote_ctx: Option<QuoteCtx>,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        let object = match &clause.payload {
            ClausePayload::Object(reference) => {
                Some(self.resolve(reference, scene, quote_ctx, "object", record)?)
            }
            ClausePayload::None => None,
            _ => None,
        };

        // `contains` on a many-group enumerates a member
        if let Some(object) = object {
            if entry.base_word() == "contains" && !entry.negated {
                let subject_instance = &self.state.instances[subject.index()];
                if subject_instance.is_group() {
                    self.add_group_member(subject, object)?;
                }
            }
        }

        let id = self.emit_vi(
            clause,
            entry,
            scene,
            if object.is_some() { ViForm::SVO } else { ViForm::SV },
            subject,
            object,
            Vec::new(),
            None,
            None,
            record,
        )?;

        // a terminating relation expires matching relations from the focus
        if entry.category == VerbCategory::RelationTerminating {
            let expired: Vec<ViId> = self
                .state
                .focus_vis_recent_first(scene)
                .filter(|vi| {
                    vi.id != id
                        && vi.category == VerbCategory::Relation
                        && vi.subject == subject
                        && vi.object == object
                })
                .map(|vi| vi.id)
                .collect();
            for vid in expired {
                self.state.vi_mut(vid).in_focus = false;
            }
        }
        Ok(id)
    }

    fn action(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        scene: SceneId,
        subject: InstanceId,
        quote_ctx: Option<QuoteCtx>,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        let (object, form) = match &clause.payload {
            ClausePayload::Object(reference) => (
                Some(self.resolve(reference, scene, quote_ctx, "object", record)?),
                ViForm::SVO,
            ),
            ClausePayload::None => (None, ViForm::SV),
            ClausePayload::Adjectives(_) | ClausePayload::Quote { .. } => (None, ViForm::SV),
        };

        // membership verbs attach the subject to an existing group
        if matches!(clause.verb.as_str(), "becomes-right-of" | "becomes-left-of") {
            let group = object.ok_or_else(|| ExecError::MembershipNeedsGroup {
                verb: clause.verb.clone(),
            })?;
            if !self.state.instances[group.index()].is_group() {
                return Err(ExecError::MembershipNeedsGroup {
                    verb: clause.verb.clone(),
                });
            }
            if clause.verb == "becomes-right-of" {
                self.add_group_member(group, subject)?;
            } else {
                self.add_group_member_front(group, subject)?;
            }
        }

        self.emit_vi(
            clause, entry, scene, form, subject, object, Vec::new(), None, None, record,
        )
    }

    fn add_group_member(&mut self, group: InstanceId, member: InstanceId) -> Result<(), ExecError> {
        let instance = &self.state.instances[group.index()];
        if instance.group_kind == Some(GroupKind::Pair) && instance.group_members.len() >= 2 {
            return Err(ExecError::PairFull);
        }
        if !instance.group_members.contains(&member) {
            self.state.instance_mut(group).group_members.push(member);
        }
        Ok(())
    }

    fn add_group_member_front(
        &mut self,
        group: InstanceId,
        member: InstanceId,
    ) -> Result<(), ExecError> {
        let instance = &self.state.instances[group.index()];
        if instance.group_kind == Some(GroupKind::Pair) && instance.group_members.len() >= 2 {
            return Err(ExecError::PairFull);
        }
        if !instance.group_members.contains(&member) {
            self.state
                .instance_mut(group)
                .group_members
                .insert(0, member);
        }
        Ok(())
    }

    fn utterance(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        scene: SceneId,
        subject: InstanceId,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        let text = match &clause.payload {
            ClausePayload::Object(reference) => reference
                .is_text_literal
                .clone()
                .ok_or(ExecError::UtterNeedsText)?,
            _ => return Err(ExecError::UtterNeedsText),
        };
        self.emit_vi(
            clause,
            entry,
            scene,
            ViForm::SVO,
            subject,
            None,
            Vec::new(),
            None,
            Some(text),
            record,
        )
    }

    fn quote_sentence(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        subject: InstanceId,
        record: &mut SentenceRecord,
    ) -> Result<ViId, ExecError> {
        let (scene_label, inner) = match &clause.payload {
            ClausePayload::Quote { scene_label, inner } => (scene_label, inner),
            _ => return Err(ExecError::BadQuoteBody),
        };
        let quote_scene =
            self.state
                .scene_by_label(scene_label)
                .ok_or_else(|| ExecError::UnknownScene {
                    label: scene_label.clone(),
                })?;
        let inner_clause = match inner.as_ref() {
            ParsedSentence::Clause(c) => c,
            _ => return Err(ExecError::BadQuoteBody),
        };
        let inner_vi = self
            .clause(
                inner_clause,
                Some(quote_scene),
                Some(QuoteCtx {
                    outer_subject: subject,
                }),
                record,
            )?
            .ok_or(ExecError::BadQuoteBody)?;

        // the outer VI lives in the outer subject's scene
        let outer_scene = self.state.instances[subject.index()].scene;
        self.emit_vi(
            clause,
            entry,
            outer_scene,
            ViForm::Quote,
            subject,
            None,
            Vec::new(),
            Some(inner_vi),
            None,
            record,
        )
    }

    // ---- scenes ------------------------------------------------------------

    fn scene_macro(
        &mut self,
        spec: &MacroSpec,
        record: &mut SentenceRecord,
    ) -> Result<(), ExecError> {
        if self
            .state
            .scenes
            .iter()
            .any(|s| s.label.as_deref() == Some(spec.scene_label.as_str()))
        {
            return Err(ExecError::DuplicateSceneLabel {
                label: spec.scene_label.clone(),
            });
        }
        let creating = self.state.current_scene;
        let new_scene = self.state.add_scene(Some(spec.scene_label.clone()));
        record.created_scenes.push(new_scene);

        if let (Some(relation), Some(creating)) = (&spec.scene_relation, creating) {
            self.state.scene_mut(creating).relations.push(SceneRelation {
                verb: relation.clone(),
                target: new_scene,
            });
        }

        for member in &spec.members {
            self.macro_member(member, creating, new_scene, record)?;
        }

        match spec.kind {
            MacroKind::NewSceneOnly => {
                if let Some(prior) = creating {
                    let ids: Vec<ViId> = self.state.scenes[prior.index()].vis.clone();
                    for id in ids {
                        self.state.vi_mut(id).in_focus = false;
                    }
                }
                self.state.set_current_scene(new_scene);
            }
            MacroKind::NewSceneCurrent => self.state.set_current_scene(new_scene),
            MacroKind::NewScene => {}
        }
        Ok(())
    }

    fn macro_member(
        &mut self,
        member: &MacroMember,
        creating: Option<SceneId>,
        new_scene: SceneId,
        record: &mut SentenceRecord,
    ) -> Result<(), ExecError> {
        let source = match &member.source {
            None => None,
            Some((attrs, name)) => {
                let creating = creating.ok_or_else(|| {
                    ExecError::ArrowSource("no current scene to resolve it in".into())
                })?;
                let id = self
                    .state
                    .find_instance(creating, attrs, name.as_deref(), &[])
                    .ok_or_else(|| {
                        let mut words = attrs.join(" ");
                        if let Some(name) = name {
                            words.push_str(&format!(" \"{name}\""));
                        }
                        ExecError::ArrowSource(format!("no in-focus match for `{words}`"))
                    })?;
                record.resolved.push(("arrow-source".into(), id));
                Some(id)
            }
        };
        let id = self.create_instance(
            new_scene,
            &member.attributes,
            member.proper_name.clone(),
            record,
        )?;
        if let Some(source) = source {
            if let Some(edge) = self.state.add_identity_edge(source, id) {
                record.created_identity_edges.push(edge);
            }
        }
        Ok(())
    }

    fn scene_sentence(
        &mut self,
        clause: &ClauseSentence,
        entry: &VerbEntry,
        record: &mut SentenceRecord,
    ) -> Result<(), ExecError> {
        if entry.category != VerbCategory::MetaScene {
            return Err(ExecError::SceneSubjectNotAllowed {
                verb: clause.verb.clone(),
            });
        }
        match entry.base_word() {
            "is-current-scene" => {
                let scene = self.subject_scene(clause, record)?;
                self.state.set_current_scene(scene);
                Ok(())
            }
            "clone-scene" => self.clone_scene(clause, record),
            _ => {
                let subject = self.subject_scene(clause, record)?;
                let object = match &clause.payload {
                    ClausePayload::Object(reference) if reference.is_scene_ref => {
                        self.scene_from_ref(reference)?
                    }
                    _ => {
                        return Err(ExecError::NeedsSceneObject {
                            verb: clause.verb.clone(),
                        })
                    }
                };
                self.state.scene_mut(subject).relations.push(SceneRelation {
                    verb: entry.base_word().to_string(),
                    target: object,
                });
                Ok(())
            }
        }
    }

    fn subject_scene(
        &mut self,
        clause: &ClauseSentence,
        record: &mut SentenceRecord,
    ) -> Result<SceneId, ExecError> {
        match &clause.subject.scene_label {
            Some(_) => self.scene_from_ref(&clause.subject),
            None => Ok(self.ensure_current_scene(record)),
        }
    }

    fn scene_from_ref(&self, reference: &ReferenceExpr) -> Result<SceneId, ExecError> {
        let label = reference
            .scene_label
            .as_deref()
            .ok_or(ExecError::SceneRefNotAllowed { role: "scene" })?;
        self.state
            .scene_by_label(label)
            .ok_or_else(|| ExecError::UnknownScene {
                label: label.to_string(),
            })
    }

    /// `Scene / clone-scene / scene #New`: copy every in-focus instance of
    /// the source into a fresh scene and identity-link the copies pairwise.
    fn clone_scene(
        &mut self,
        clause: &ClauseSentence,
        record: &mut SentenceRecord,
    ) -> Result<(), ExecError> {
        let source = self.subject_scene(clause, record)?;
        let target_label = match &clause.payload {
            ClausePayload::Object(reference) if reference.is_scene_ref => reference
                .scene_label
                .clone()
                .ok_or(ExecError::SceneRefNotAllowed { role: "clone target" })?,
            _ => {
                return Err(ExecError::NeedsSceneObject {
                    verb: clause.verb.clone(),
                })
            }
        };
        if self.state.scene_by_label(&target_label).is_some() {
            return Err(ExecError::CloneTargetExists {
                label: target_label,
            });
        }
        let target = self.state.add_scene(Some(target_label));
        record.created_scenes.push(target);
        self.state.scene_mut(source).relations.push(SceneRelation {
            verb: "clone".into(),
            target,
        });

        let originals: Vec<InstanceId> = self.state.scenes[source.index()]
            .members
            .iter()
            .copied()
            .filter(|id| self.state.instances[id.index()].in_focus)
            .collect();
        let mut mapping: Vec<(InstanceId, InstanceId)> = Vec::new();
        for original in &originals {
            let instance = self.state.instances[original.index()].clone();
            let copy = self.state.add_instance(
                target,
                instance.attributes.clone(),
                instance.proper_name.clone(),
                instance.group_kind,
            );
            record.created_instances.push(copy);
            mapping.push((*original, copy));
            if let Some(edge) = self.state.add_identity_edge(*original, copy) {
                record.created_identity_edges.push(edge);
            }
        }
        // group members point at the copied counterparts
        for (original, copy) in &mapping {
            let members = self.state.instances[original.index()].group_members.clone();
            let mapped: Vec<InstanceId> = members
                .iter()
                .filter_map(|m| mapping.iter().find(|(o, _)| o == m).map(|(_, c)| *c))
                .collect();
            self.state.instance_mut(*copy).group_members = mapped;
        }
        Ok(())
    }
}

fn group_kind_of(attributes: &[String]) -> Option<GroupKind> {
    if attributes.iter().any(|a| a == "pair") {
        Some(GroupKind::Pair)
    } else if attributes.iter().any(|a| a == "many") {
        Some(GroupKind::Many)
    } else {
        None
    }
}
