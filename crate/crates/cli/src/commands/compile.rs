use std::collections::BTreeMap;

use polykit::template::{oversized, DEFAULT_CHAR_BUDGET};
use polykit::{read_samples, render, select_templates, subsample, Split, Template};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{file_stem, write, Header};

pub fn run(cfg: &RunConfig, splits: &[Split]) -> Result<(), CliError> {
    let registry = cfg.registry()?;
    let regime = cfg.regime()?;
    let out_dir = cfg.out_dir().join("compiled");
    let mut long_prompts = 0;
    for desc in cfg.descriptors()? {
        for (&split, path) in &desc.splits {
            if !splits.contains(&split) {
                continue;
            }
            let mut samples = read_samples(path, &desc)?;
            // Subsampling only thins the training data.
            if split == Split::Train {
                samples = subsample(&samples, &cfg.sampling_policy(desc.role)?);
            }
            let mut by_language: BTreeMap<&str, &Template> = BTreeMap::new();
            let mut body = String::new();
            for s in &samples {
                let template = match by_language.get(s.language.as_str()) {
                    Some(t) => *t,
                    None => {
                        let t = select_templates(registry.templates(), &[&desc.name], regime, &s.language)?[&desc.name];
                        by_language.insert(&s.language, t);
                        t
                    }
                };
                let pair = render(template, s)?;
                long_prompts += oversized(std::slice::from_ref(&pair), DEFAULT_CHAR_BUDGET).count();
                body.push_str(&serde_json::to_string(&pair).expect("pair serializes"));
                body.push('\n');
            }
            let header = Header::new(cfg)
                .with("dataset", &desc.name)
                .with("split", split.as_str())
                .with("count", samples.len());
            let file = out_dir.join(format!("{}.{}.jsonl", file_stem(&desc.name), split.as_str()));
            write(&file, &(header.jsonl() + &body))?;
            println!("{}\t{}\t{}", desc.name, split.as_str(), samples.len());
        }
    }
    if long_prompts > 0 {
        eprintln!("warning: {long_prompts} prompt(s) exceed {DEFAULT_CHAR_BUDGET} characters");
    }
    Ok(())
}
