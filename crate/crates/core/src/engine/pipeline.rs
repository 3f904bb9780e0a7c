use std::collections::BTreeSet;

use super::{now_ms, CandidateDebug, EngineError, FlowDebug, TurnDebug, TurnResponse};
use crate::candidate::{ModuleId, ResponseCandidate};
use crate::flow::{self, Delegation, FlowCtx, StepOutput};
use crate::kg::EntityId;
use crate::memory::{resolve_focus, Effect, LtmArchive, Scalar, SessionState, SystemTurn, TurnContent};
use crate::modules::{self, base, delegate_target, ModuleCtx};
use crate::nlu::{classify_mood, AnnotatedUtterance, AsrStatus, NluError, TurnInput};
use crate::postprocess::{apply_hedge, emit_ssml, merge, merge_partner, plain_ssml, FinalReply, Provenance};
use crate::ranker::{rank, RankingContext, Selection};
use crate::resources::Resources;

/// State variable naming the topic of the last reply.
pub const CURRENT_TOPIC: &str = "current_topic";
/// Turns of history looked at when classifying mood.
const MOOD_WINDOW: usize = 3;

struct FlowStage {
    candidates: Vec<ResponseCandidate>,
    debug: Option<FlowDebug>,
}

/// Runs the flow the user is in, or the one they triggered. Exits are
/// applied at once so the rest of the pipeline sees the flow released.
fn flow_stage(
    res: &Resources,
    state: &mut SessionState,
    utt: &AnnotatedUtterance,
    focus: Option<&EntityId>,
    mood: crate::nlu::Mood,
) -> FlowStage {
    let mut stage = FlowStage { candidates: Vec::new(), debug: None };
    let (flow_id, expects) = match state.active_flow() {
        Some(id) => {
            let expects = state.flow_state.get(id).map(|c| c.expects.clone()).unwrap_or_default();
            (id.to_string(), expects)
        }
        None => match flow::trigger(&res.flows, state, utt) {
            Some(t) => {
                let id = t.flow().to_string();
                let entry = res.flows.get(&id).map(|f| f.entry_expects.clone()).unwrap_or_default();
                (id, entry)
            }
            None => return stage,
        },
    };
    let Some(graph) = res.flows.get(&flow_id) else {
        tracing::warn!(flow = %flow_id, "active flow is not loaded; releasing it");
        state.apply(Effect::Flow { id: flow_id, cursor: None });
        return stage;
    };
    let was_active = state.active_flow() == Some(flow_id.as_str());
    let fctx = FlowCtx {
        flow: graph,
        state,
        utterance: utt,
        graph: &res.graph,
        arguments: &res.arguments,
        registry: &res.registry,
    };
    let matched = flow::match_node(&fctx, &expects);
    if matched.is_none() && !was_active {
        // Triggered, but no entry node accepts this turn.
        return stage;
    }
    let output = match flow::step(&fctx, matched.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            tracing::warn!(flow = %flow_id, error = %e, "flow step failed; exiting flow");
            state.apply(Effect::Flow { id: flow_id.clone(), cursor: None });
            return stage;
        }
    };
    let expects_after = match &output {
        StepOutput::Say { expects, .. } | StepOutput::Delegate { expects, .. } => expects.clone(),
        StepOutput::Exit { .. } => Vec::new(),
    };
    let mut debug = FlowDebug {
        flow: flow_id.clone(),
        node: output.node().map(str::to_string),
        expects_before: expects,
        expects_after,
        exited: output.is_exit(),
    };
    let module = ModuleId::flow(flow_id.clone());
    match output {
        StepOutput::Say { node, text, effects, .. } => {
            let c = ResponseCandidate::new(module, text, 1.0)
                .prompt(format!("flow:{flow_id}:{node}"))
                .topic(graph.topic.clone())
                .keywords(graph.triggers.iter().cloned())
                .with_effects(effects)
                .effect(Effect::ExploreTopic(graph.topic.clone()));
            stage.candidates.push(c);
        }
        StepOutput::Exit { effects, .. } => state.apply_all(effects),
        StepOutput::Delegate { delegation, expects, effects, .. } => {
            let handoff = expects.is_empty();
            let topic = graph.topic.clone();
            let delegated = delegated_candidates(res, state, utt, focus, mood, &delegation, &topic);
            if delegated.is_empty() {
                tracing::debug!(flow = %flow_id, module = %delegation.module, "delegate produced nothing; exiting flow");
                state.apply(Effect::Flow { id: flow_id.clone(), cursor: None });
                debug.exited = true;
            } else if handoff {
                // The module takes the floor; the flow is finished.
                let exit: Vec<Effect> = effects
                    .into_iter()
                    .filter(|e| !matches!(e, Effect::Flow { .. }))
                    .chain([
                        Effect::Flow { id: flow_id.clone(), cursor: None },
                        Effect::Completed(module.clone()),
                    ])
                    .collect();
                state.apply_all(exit);
                debug.exited = true;
                stage.candidates.extend(delegated);
            } else {
                // The flow keeps the floor and resumes next turn.
                for mut c in delegated {
                    c.effects.retain(|e| !matches!(e, Effect::SetActive(_) | Effect::Release(_)));
                    c.effects.extend(effects.iter().cloned());
                    stage.candidates.push(c.on_behalf_of(module.clone()));
                }
            }
        }
    }
    stage.debug = Some(debug);
    stage
}

fn delegated_candidates(
    res: &Resources,
    state: &SessionState,
    utt: &AnnotatedUtterance,
    focus: Option<&EntityId>,
    mood: crate::nlu::Mood,
    delegation: &Delegation,
    topic: &str,
) -> Vec<ResponseCandidate> {
    let Some(target) = delegate_target(delegation) else {
        tracing::warn!(module = %delegation.module, "unknown delegation target");
        return Vec::new();
    };
    let ctx = ModuleCtx {
        res,
        state,
        utt,
        focus,
        mood,
        delegation: Some(delegation),
        flow_topic: Some(topic),
    };
    modules::propose(&target, &ctx)
        .into_iter()
        .map(|mut c| {
            c.confidence = 1.0;
            c
        })
        .collect()
}

/// Keeps the first of candidates with the same source and text.
fn dedupe(pool: Vec<ResponseCandidate>) -> Vec<ResponseCandidate> {
    let mut seen = BTreeSet::new();
    pool.into_iter()
        .filter(|c| seen.insert((c.source_module.clone(), c.text.clone())))
        .collect()
}

fn input_error(e: NluError) -> EngineError {
    match e {
        NluError::Input(msg) => EngineError::Input(msg),
        other => EngineError::Internal(other.to_string()),
    }
}

pub(super) fn run_turn(
    res: &Resources,
    state: &mut SessionState,
    input: &TurnInput,
    archive: &LtmArchive,
) -> Result<TurnResponse, EngineError> {
    if state.ended {
        return Err(EngineError::SessionEnded(state.session_id.clone()));
    }
    let utt = res.annotator.annotate(input, &res.graph).map_err(input_error)?;
    state.begin_turn();

    let focus = resolve_focus(state, &utt);
    let recent: Vec<AnnotatedUtterance> = {
        let all: Vec<&AnnotatedUtterance> = state.user_turns().collect();
        all[all.len().saturating_sub(MOOD_WINDOW)..].iter().map(|u| (*u).clone()).collect()
    };
    let mood = classify_mood(&utt, &recent);
    state.user_profile.mood = mood;
    state.record_turn(TurnContent::User(utt.clone()), now_ms());

    let mut flow_debug = None;
    let pool = if utt.asr_status == AsrStatus::NeedsClarification {
        vec![base::clarification()]
    } else {
        let stage = flow_stage(res, state, &utt, focus.as_ref(), mood);
        flow_debug = stage.debug;
        let mut pool = stage.candidates;
        let ctx = ModuleCtx {
            res,
            state,
            utt: &utt,
            focus: focus.as_ref(),
            mood,
            delegation: None,
            flow_topic: None,
        };
        pool.extend(modules::propose_all(&ctx));
        let pool = dedupe(pool);
        if let Some(active) = state.active_module.clone().filter(|m| !m.is_flow()) {
            let still_engaged = pool
                .iter()
                .any(|c| c.source_module == active || c.on_behalf_of.as_ref() == Some(&active));
            if !still_engaged {
                state.apply(Effect::Release(active));
            }
        }
        pool
    };

    let mut entities: Vec<EntityId> = utt.entity_ids().cloned().collect();
    entities.extend(focus.clone());
    let current_topic = state.state_vars.get(CURRENT_TOPIC).and_then(Scalar::as_str).map(str::to_string);
    let ranked = {
        let ctx = RankingContext {
            config: &res.config.ranker,
            active_module: state.active_module.clone(),
            surfaced_prompts: &state.surfaced_prompts,
            utterance_tokens: utt.tokens.clone(),
            content_words: utt.content_words.clone(),
            entities,
            current_topic,
            stopwords: &res.annotator.stopwords,
            profanity: &res.annotator.profanity,
        };
        rank(pool, &ctx, &mut state.rng).map_err(|e| EngineError::Internal(e.to_string()))?
    };
    let winner = ranked.winner().candidate.clone();

    state.apply_all(winner.effects.iter().cloned());
    state.modules.consecutive_ood = if ranked.selection == Selection::OutOfDomain {
        state.modules.consecutive_ood + 1
    } else {
        0
    };
    if let Some(t) = &winner.topic {
        state.apply(Effect::SetVar(CURRENT_TOPIC.into(), Scalar::Text(t.clone())));
    }

    let mut text = winner.text.clone();
    let mut reply_entities = winner.entities.clone();
    let mut merged = None;
    if !winner.priority {
        if let Some(i) = merge_partner(&ranked, res.config.ranker.base_confidence) {
            let partner = &ranked.entries[i].candidate;
            text = merge(&text, &partner.text);
            for e in &partner.entities {
                if !reply_entities.contains(e) {
                    reply_entities.push(e.clone());
                }
            }
            state.apply(Effect::Surface(partner.prompt_id.clone()));
            merged = Some(partner.prompt_id.clone());
        }
    }
    let mut hedge_rule = None;
    if !winner.priority {
        let (hedged, rule) = apply_hedge(&text, &utt, &res.hedges, &mut state.rng);
        text = hedged;
        hedge_rule = rule;
    }
    let (display_text, ssml_text) = emit_ssml(&text).unwrap_or_else(|e| {
        tracing::warn!(error = %e, "speech markers dropped");
        plain_ssml(&text)
    });

    state.record_turn(
        TurnContent::System(SystemTurn {
            text: display_text.clone(),
            source: winner.source_module.clone(),
            prompt_id: winner.prompt_id.clone(),
            entities: reply_entities,
        }),
        now_ms(),
    );
    state.flush_to_ltm(res.config.memory.flush_threshold, archive);

    let pool_debug = ranked
        .entries
        .iter()
        .map(|e| CandidateDebug {
            source: e.candidate.source_module.clone(),
            text: e.candidate.text.clone(),
            prompt_id: e.candidate.prompt_id.clone(),
            confidence: e.candidate.confidence,
            context: e.context,
            loss: e.loss,
            final_confidence: e.final_confidence,
            valid: e.valid,
            priority: e.candidate.priority,
            dialogue_act: e.candidate.dialogue_act,
            discourse_relation: e.candidate.discourse_relation,
            entities: e.candidate.entities.clone(),
        })
        .collect();
    Ok(TurnResponse {
        reply: FinalReply {
            display_text,
            ssml_text,
            provenance: Provenance { winner: winner.prompt_id.clone(), merged, hedge_rule },
        },
        debug: TurnDebug {
            intent: utt.intent.to_string(),
            dialogue_act: utt.dialogue_act,
            topic: utt.topic.clone(),
            mood,
            focus,
            pool: pool_debug,
            winner: ranked.winner,
            selection: ranked.selection,
            tie_size: ranked.tie_size,
            active_module: state.active_module.clone(),
            flow: flow_debug,
            discourse_relation: winner.discourse_relation,
        },
        ended: state.ended,
    })
}
