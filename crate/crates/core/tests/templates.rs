use std::path::Path;

use polykit::{
    compile, decode_prediction, parse_template, read_samples, select_templates, DatasetDescriptor, Regime, Role, Split,
    TaskKind, TemplateRegistry,
};

const DATASETS: [&str; 7] = ["XQuAD", "TyDiQA", "MLQA", "XNLI", "PAWS-X", "MARC", "MLDOC"];

fn workspace_fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn registry_with_fixture_templates() -> TemplateRegistry {
    let mut registry = TemplateRegistry::builtin_english();
    let text = std::fs::read_to_string(workspace_fixtures().join("templates_inlingual.jsonl")).unwrap();
    registry.extend_from_jsonl(&text).unwrap();
    registry
}

#[test]
fn prompt_design_examples_round_trip() {
    let text = include_str!("fixtures/prompt_design_examples.txt");
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let parsed = parse_template(line).unwrap_or_else(|e| panic!("`{line}`: {e}"));
        assert_eq!(parsed.to_string(), line);
        assert_eq!(parse_template(&parsed.to_string()).unwrap(), parsed);
    }
}

#[test]
fn registry_survives_jsonl_round_trip() {
    let registry = registry_with_fixture_templates();
    let again = TemplateRegistry::from_jsonl(&registry.to_jsonl()).unwrap();
    assert_eq!(again.templates(), registry.templates());
    assert_eq!(registry.templates().len(), 42 + 84);
}

#[test]
fn every_regime_has_a_template_for_every_fixture_language() {
    let registry = registry_with_fixture_templates();
    for regime in Regime::all() {
        for lang in ["en", "de", "zh"] {
            let picked = select_templates(registry.templates(), &DATASETS, regime, lang)
                .unwrap_or_else(|e| panic!("{regime} {lang}: {e}"));
            assert_eq!(picked.len(), DATASETS.len());
            for t in picked.values() {
                let want = if regime.to_string().ends_with("cross") { "en" } else { lang };
                assert_eq!(t.lang, want, "{regime} {}", t.id);
                assert_eq!(t.uniformity, regime.uniformity);
            }
        }
    }
}

#[test]
fn in_policy_without_a_template_is_an_error() {
    let registry = TemplateRegistry::builtin_english();
    let regime: Regime = "unified-in".parse().unwrap();
    let err = select_templates(registry.templates(), &["XNLI"], regime, "sw").unwrap_err();
    let message = err.to_string();
    assert!(message.contains("XNLI") && message.contains("sw"), "{message}");
}

#[test]
fn rendered_targets_decode_back_to_their_labels() {
    let registry = registry_with_fixture_templates();
    for (dataset, file, task) in [
        ("XNLI", "xnli", TaskKind::SentencePair),
        ("PAWS-X", "pawsx", TaskKind::SentencePair),
        ("MARC", "marc", TaskKind::SentimentCls),
        ("MLDOC", "mldoc", TaskKind::TopicCls),
    ] {
        let path = workspace_fixtures().join(format!("data/{file}.test.jsonl"));
        let desc = DatasetDescriptor {
            name: dataset.into(),
            task,
            role: Role::Target,
            languages: vec![],
            splits: [(Split::Test, path.clone())].into_iter().collect(),
        };
        let samples = read_samples(&path, &desc).unwrap();
        for regime in Regime::all() {
            for lang in ["en", "de", "zh"] {
                let group: Vec<_> = samples.iter().filter(|s| s.language == lang).cloned().collect();
                let selection = select_templates(registry.templates(), &[dataset], regime, lang).unwrap();
                let pairs = compile(&group, &selection).unwrap();
                for (pair, sample) in pairs.iter().zip(&group) {
                    let decoded = decode_prediction(selection[dataset], &pair.decoder_text);
                    assert_eq!(decoded.answer, sample.golds[0], "{regime} {}", pair.template_id);
                    assert!(!decoded.fallback_used);
                }
            }
        }
    }
}
