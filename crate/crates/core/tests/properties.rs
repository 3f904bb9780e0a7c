//! Property tests over the ranker, the graph and speech markup.

mod common;

use std::collections::BTreeSet;

use common::{plain, RankFixture};
use drdm_core::candidate::{ModuleId, PromptId};
use drdm_core::kg::{DiscourseRelation, Edge, Entity, EntityId, KnowledgeGraph};
use drdm_core::postprocess::{emit_ssml, strip_tags};
use drdm_core::ranker::{final_confidence, rank, Selection};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODULES: [ModuleId; 5] =
    [ModuleId::Opinions, ModuleId::Retrieval, ModuleId::Recursive, ModuleId::Storytelling, ModuleId::Intimacy];

proptest! {
    #[test]
    fn final_confidence_is_a_probability(ctx in -1.0f64..2.0, conf in -1.0f64..2.0, loss in 0.0f64..2.0) {
        let f = final_confidence(ctx, conf, loss);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(f <= ctx.max(conf) - loss + 1e-12 || f == 0.0);
    }

    #[test]
    fn priority_candidates_always_win(
        confs in prop::collection::vec(0.0f64..1.0, 1..6),
        ranks in prop::collection::vec(0u8..5, 1..4),
        seed in any::<u64>(),
    ) {
        let fx = RankFixture::default();
        let mut pool: Vec<_> = confs.iter().enumerate()
            .map(|(i, &c)| plain(MODULES[i % MODULES.len()].clone(), &format!("c{i}"), c))
            .collect();
        for (i, &r) in ranks.iter().enumerate() {
            pool.push(plain(ModuleId::Base, &format!("p{i}"), 0.1).priority(r));
        }
        let top = *ranks.iter().max().unwrap();
        let first_top = ranks.iter().position(|&r| r == top).unwrap();
        let ranked = rank(pool, &fx.ctx("hello", None), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(ranked.selection, Selection::Priority);
        prop_assert_eq!(ranked.winner().candidate.prompt_id.as_str(), format!("p{first_top}"));
    }

    #[test]
    fn argmax_winner_has_the_maximal_score(
        confs in prop::collection::vec(0.0f64..1.0, 1..8),
        surfaced in prop::collection::vec(any::<bool>(), 8),
        seed in any::<u64>(),
    ) {
        let mut fx = RankFixture::default();
        for (i, s) in surfaced.iter().enumerate() {
            if *s { fx.surfaced.insert(PromptId::new(format!("c{i}"))); }
        }
        let pool: Vec<_> = confs.iter().enumerate()
            .map(|(i, &c)| plain(MODULES[i % MODULES.len()].clone(), &format!("c{i}"), c))
            .collect();
        let ranked = rank(pool, &fx.ctx("hello", None), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let best = ranked.entries.iter().map(|e| e.final_confidence).fold(0.0, f64::max);
        prop_assert_eq!(ranked.winner().final_confidence, best);
        let expected: usize = ranked.entries.iter().filter(|e| e.final_confidence == best).count();
        prop_assert_eq!(ranked.tie_size, expected);
    }

    #[test]
    fn markup_strips_back_to_the_display_text(
        parts in prop::collection::vec(
            prop_oneof![
                "[a-zA-Z ,.!?&'\"<>]{1,12}".prop_map(|s| s),
                (1u32..2000).prop_map(|n| format!("[[pause:{n}ms]]")),
                "[a-z]{1,8}".prop_map(|s| format!("[[emph:{s}]]")),
                "[a-z]{1,8}".prop_map(|s| format!("[[prosody:slow:{s}]]")),
            ],
            1..8,
        ),
    ) {
        let marked = parts.concat();
        let (display, ssml) = emit_ssml(&marked).unwrap();
        prop_assert_eq!(strip_tags(&ssml), display.clone());
        prop_assert!(!display.contains("[["));
    }

    #[test]
    fn relation_paths_are_grounded(
        edges in prop::collection::vec((0usize..8, 0usize..4, 0usize..8), 0..24),
        focus in 0usize..8,
    ) {
        let rels = ["located_in", "instance_of", "artist", "genre"];
        let entities: Vec<Entity> = (0..8)
            .map(|i| serde_json::from_value(serde_json::json!({"id": format!("e{i}"), "name": format!("E{i}")})).unwrap())
            .collect();
        let edges: Vec<Edge> = edges
            .into_iter()
            .filter(|(s, _, d)| s != d)
            .map(|(s, r, d)| Edge::new(format!("e{s}"), rels[r], format!("e{d}")))
            .collect();
        let graph = KnowledgeGraph::from_parts(entities, edges).unwrap();
        let focus = EntityId::new(format!("e{focus}"));
        for relation in DiscourseRelation::ALL {
            for inst in graph.instantiate_relation(relation, &focus, &BTreeSet::new()).unwrap() {
                prop_assert!(!inst.path.is_empty());
                prop_assert_ne!(&inst.result, &focus);
                prop_assert_eq!(inst.path[0].from_node(), &focus);
                prop_assert_eq!(inst.path.last().unwrap().to_node(), &inst.result);
                for pair in inst.path.windows(2) {
                    prop_assert_eq!(pair[0].to_node(), pair[1].from_node());
                }
                for step in &inst.path {
                    prop_assert!(graph.has_edge(&step.edge), "ungrounded edge {:?}", step.edge);
                }
            }
        }
    }
}
