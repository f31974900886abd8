use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use treepolicy::corpus::{self, CorpusConfig, Split};
use treepolicy::ddt::{init_from_lexical, random_ddt, Ddt, InitConfig};
use treepolicy::envs::{self, EnvConfig};
use treepolicy::explain;
use treepolicy::rl::{self, MlpPolicy, PolicyModel, PpoConfig, TrainingLog};
use treepolicy::tree::{self, compare_trees, parse_dsl, validate, Domain, LexicalTree, PredicateDictionary};

use crate::config::ConfigFile;
use crate::manifest::{now, RunManifest};
use crate::{
    Command, DiscretizeArgs, EvalTranslateArgs, ExplainArgs, GenCorpusArgs, InitDdtArgs, ParseArgs, ReportArgs, TrainArgs, ValidateArgs,
};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invalid(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Parse(a) => parse(a),
        Command::Validate(a) => validate_cmd(a),
        Command::GenCorpus(a) => gen_corpus(a),
        Command::InitDdt(a) => init_ddt(a),
        Command::Train(a) => train(a),
        Command::Discretize(a) => discretize(a),
        Command::Explain(a) => explain_cmd(a),
        Command::Report(a) => report(a),
        Command::EvalTranslate(a) => eval_translate(a),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_tree(path: &Path) -> anyhow::Result<LexicalTree> {
    tree::deserialize(&read(path)?).with_context(|| format!("in tree file {}", path.display()))
}

fn read_policy(path: &Path) -> anyhow::Result<PolicyModel> {
    serde_json::from_str(&read(path)?).with_context(|| format!("in policy file {}", path.display()))
}

fn policy_dims(model: &PolicyModel) -> (usize, usize) {
    use rl::Policy;
    match model {
        PolicyModel::Ddt(d) => (Policy::obs_dim(d), Policy::n_actions(d)),
        PolicyModel::Mlp(m) => (m.obs_dim(), m.n_actions()),
    }
}

fn domain_for_dims(obs_dim: usize, n_actions: usize) -> Option<Domain> {
    Domain::ALL.into_iter().find(|&d| envs::obs_dim(d) == obs_dim && envs::n_actions(d) == n_actions)
}

fn parse(a: ParseArgs) -> Outcome {
    let started = now();
    let dict = PredicateDictionary::for_domain(a.domain);
    let text = read(&a.input)?;
    let tree = parse_dsl(&text, &dict).map_err(|e| anyhow!("{}: {e}", a.input.display()))?;
    let report = validate(&tree, &dict);
    if !report.is_ok() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(anyhow!("{}: {}", a.input.display(), list.join("; ")).into());
    }
    write(&a.out, &(tree::serialize(&tree) + "\n"))?;
    let mut m = RunManifest::new("parse", json!({ "domain": a.domain }), started);
    m.inputs.push(a.input.clone());
    m.outputs.push(a.out.clone());
    m.write(&a.out)?;
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Outcome {
    let tree = read_tree(&a.tree)?;
    let dict = PredicateDictionary::for_domain(a.domain.unwrap_or(tree.domain));
    let report = validate(&tree, &dict);
    if report.is_ok() {
        println!("{}: valid {} tree (depth {}, {} nodes)", a.tree.display(), tree.domain, tree.depth(), tree.node_count());
        Ok(())
    } else {
        for v in &report.violations {
            println!("{}: {v}", a.tree.display());
        }
        Err(anyhow!("{} violation(s)", report.violations.len()).into())
    }
}

fn gen_corpus(a: GenCorpusArgs) -> Outcome {
    let started = now();
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut cfg: CorpusConfig = file.section("corpus", CorpusConfig::default())?;
    if let Some(v) = a.n_base {
        cfg.n_base = v;
    }
    if let Some(v) = a.aug {
        cfg.aug_per_example = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = &a.split {
        cfg.split_ratios = [v[0], v[1], v[2]];
    }
    if let Some(v) = a.synonym_rate {
        cfg.synonym_rate = v;
    }
    if let Some(v) = a.min_depth {
        cfg.depth_range.0 = v;
    }
    if let Some(v) = a.max_depth {
        cfg.depth_range.1 = v;
    }
    cfg.check().map_err(|e| usage(e.to_string()))?;
    let dict = PredicateDictionary::for_domain(a.domain);
    let built = corpus::build_corpus(&dict, &cfg).map_err(anyhow::Error::from)?;
    let mut out = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    corpus::write_examples(&built.examples, &mut out).map_err(anyhow::Error::from)?;
    out.flush().context("flushing corpus")?;
    let mut vocab = Vec::new();
    corpus::write_vocab(&built.vocab, &mut vocab).map_err(anyhow::Error::from)?;
    fs::write(&a.vocab, vocab).with_context(|| format!("writing {}", a.vocab.display()))?;

    let mut counts = BTreeMap::new();
    for e in &built.examples {
        *counts.entry(e.split.to_string()).or_insert(0usize) += 1;
    }
    println!("{} examples {:?}, vocabulary {} entries", built.examples.len(), counts, built.vocab.len());
    let mut m = RunManifest::new("gen-corpus", json!({ "domain": a.domain, "corpus": cfg }), started);
    m.seed = Some(cfg.seed);
    m.outputs = vec![a.out.clone(), a.vocab.clone()];
    m.write(&a.out)?;
    Ok(())
}

fn init_ddt(a: InitDdtArgs) -> Outcome {
    let started = now();
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut init: InitConfig = file.section("init", InitConfig::default())?;
    if let Some(v) = a.leaf_concentration {
        init.leaf_concentration = v;
    }
    if let Some(v) = a.alpha {
        init.alpha = v;
    }
    if a.alpha_learnable {
        init.alpha_learnable = true;
    }
    let mut inputs = Vec::new();
    let (model, kind) = if let Some(path) = &a.tree {
        let tree = read_tree(path)?;
        if a.domain.is_some_and(|d| d != tree.domain) {
            return Err(usage(format!("--domain does not match the {} tree", tree.domain)));
        }
        inputs.push(path.clone());
        let ddt = init_from_lexical::<f64>(&tree, &tree.dictionary(), &init).map_err(anyhow::Error::from)?;
        (PolicyModel::Ddt(ddt), "lexical")
    } else {
        let domain = a.domain.ok_or_else(|| usage("--random and --mlp need --domain"))?;
        if a.mlp {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
            let m = MlpPolicy::new(envs::obs_dim(domain), envs::n_actions(domain), envs::observation_scale(domain), &mut rng);
            (PolicyModel::Mlp(m), "mlp")
        } else if a.random {
            if a.leaves == 0 {
                return Err(usage("--leaves must be positive"));
            }
            let mut ddt: Ddt<f64> = random_ddt(domain, a.leaves, a.seed);
            ddt.set_alpha(init.alpha, init.alpha_learnable).map_err(|e| usage(e.to_string()))?;
            (PolicyModel::Ddt(ddt), "random")
        } else {
            return Err(usage("give one of --tree, --random or --mlp"));
        }
    };
    write(&a.out, &(serde_json::to_string_pretty(&model).context("serializing policy")? + "\n"))?;
    let mut m = RunManifest::new("init-ddt", json!({ "kind": kind, "init": init, "leaves": a.leaves, "domain": a.domain }), started);
    m.seed = Some(a.seed);
    m.inputs = inputs;
    m.outputs.push(a.out.clone());
    m.write(&a.out)?;
    Ok(())
}

fn train(a: TrainArgs) -> Outcome {
    let started = now();
    if a.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let model = read_policy(&a.policy)?;
    let (obs_dim, n_actions) = policy_dims(&model);
    let domain = match a.domain {
        Some(d) => d,
        None => domain_for_dims(obs_dim, n_actions).ok_or_else(|| anyhow!("no domain has {obs_dim} features and {n_actions} actions"))?,
    };
    let file = ConfigFile::load(a.config.as_deref())?;
    let defaults = match model {
        PolicyModel::Ddt(_) => PpoConfig::for_ddt(),
        PolicyModel::Mlp(_) => PpoConfig::for_mlp(),
    };
    let mut ppo: PpoConfig = file.section("ppo", defaults)?;
    if let Some(v) = a.episodes {
        ppo.total_episodes = v;
    }
    if let Some(v) = a.lr {
        ppo.lr = v;
    }
    if let Some(v) = a.rollout_steps {
        ppo.rollout_steps = v;
    }
    if let Some(v) = a.window {
        ppo.window = v;
    }
    ppo.check().map_err(|e| usage(e.to_string()))?;
    let mut env: EnvConfig = file.section("env", EnvConfig::new(domain, a.seed))?;
    env.domain = domain;
    env.check().map_err(|e| usage(e.to_string()))?;
    let label = a.label.clone().unwrap_or_else(|| stem(&a.policy));
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;

    let seeds: Vec<u64> = (0..a.seeds as u64).map(|i| a.seed + i).collect();
    let results: Vec<anyhow::Result<(TrainingLog, PolicyModel)>> = match &model {
        PolicyModel::Ddt(d) => rl::train_seeds(d, &env, &ppo, &label, &seeds)
            .into_iter()
            .map(|r| r.map(|(l, p)| (l, PolicyModel::Ddt(p))).map_err(Into::into))
            .collect(),
        PolicyModel::Mlp(m) => rl::train_seeds(m, &env, &ppo, &label, &seeds)
            .into_iter()
            .map(|r| r.map(|(l, p)| (l, PolicyModel::Mlp(p))).map_err(Into::into))
            .collect(),
    };
    let mut outputs = Vec::new();
    for (seed, result) in seeds.iter().zip(results) {
        let (log, trained) = result.with_context(|| format!("training seed {seed}"))?;
        let log_path = a.out_dir.join(format!("{label}-seed{seed}.log.jsonl"));
        let policy_path = a.out_dir.join(format!("{label}-seed{seed}.policy.json"));
        let mut w = BufWriter::new(File::create(&log_path).with_context(|| format!("creating {}", log_path.display()))?);
        log.write_jsonl(&mut w).map_err(anyhow::Error::from)?;
        w.flush().context("flushing log")?;
        write(&policy_path, &(serde_json::to_string_pretty(&trained).context("serializing policy")? + "\n"))?;
        let returns = log.returns();
        let tail = &returns[returns.len().saturating_sub(ppo.window)..];
        let tail_mean = if tail.is_empty() { f64::NAN } else { tail.iter().sum::<f64>() / tail.len() as f64 };
        println!("{label} seed {seed}: {} episodes, last-{} mean return {tail_mean:.3}, {:.1}s", returns.len(), tail.len(), log.wall_clock_secs);
        outputs.push(log_path);
        outputs.push(policy_path);
    }
    let mut m = RunManifest::new("train", json!({ "domain": domain, "label": label, "seeds": seeds, "ppo": ppo, "env": env }), started);
    m.seed = Some(a.seed);
    m.inputs.push(a.policy.clone());
    m.outputs = outputs;
    m.write(&a.out_dir.join(&label))?;
    Ok(())
}

fn stem(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "policy".into());
    name.split('.').next().filter(|s| !s.is_empty()).unwrap_or("policy").to_string()
}

fn discretize(a: DiscretizeArgs) -> Outcome {
    let started = now();
    let PolicyModel::Ddt(ddt) = read_policy(&a.policy)? else {
        return Err(anyhow!("only tree policies can be discretized").into());
    };
    let domain = domain_for_dims(ddt.obs_dim(), ddt.n_actions())
        .ok_or_else(|| anyhow!("no domain has {} features and {} actions", ddt.obs_dim(), ddt.n_actions()))?;
    let (hard, tree) = ddt.discretize_to_tree(&PredicateDictionary::for_domain(domain)).map_err(anyhow::Error::from)?;
    write(&a.out, &(tree::serialize(&tree) + "\n"))?;
    let mut m = RunManifest::new("discretize", json!({ "domain": domain }), started);
    m.inputs.push(a.policy.clone());
    m.outputs.push(a.out.clone());
    if let Some(p) = &a.params_out {
        write(p, &(serde_json::to_string_pretty(&PolicyModel::Ddt(hard)).context("serializing policy")? + "\n"))?;
        m.outputs.push(p.clone());
    }
    m.write(&a.out)?;
    Ok(())
}

fn explain_cmd(a: ExplainArgs) -> Outcome {
    let tree = read_tree(&a.tree)?;
    let text = explain::render(&tree, a.style).map_err(|e| anyhow!("no phrase for `{}`", e.0))? + "\n";
    match &a.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Label shared by every seed of one configuration.
fn group_label(label: &str) -> &str {
    label.rsplit_once("/seed").map_or(label, |(base, _)| base)
}

fn report(a: ReportArgs) -> Outcome {
    let mut groups: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for path in &a.logs {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let log = TrainingLog::read_jsonl(BufReader::new(file)).with_context(|| format!("in log {}", path.display()))?;
        groups.entry(group_label(&log.label).to_string()).or_default().push(log.returns());
    }
    let mut csv = String::from("label,runs,episodes,median_initial,se_initial,median_max_rolling,se_max_rolling\n");
    for (label, runs) in &groups {
        let s = rl::summarize_runs(runs, a.window).with_context(|| format!("summarizing `{label}`"))?;
        let episodes = runs.iter().map(Vec::len).min().unwrap_or(0);
        csv.push_str(&format!(
            "{label},{},{episodes},{:.4},{:.4},{:.4},{:.4}\n",
            s.runs, s.median_initial, s.se_initial, s.median_max_rolling, s.se_max_rolling
        ));
    }
    print!("{csv}");
    if let Some(out) = &a.out {
        write(out, &csv)?;
    }
    Ok(())
}

/// One line of a predictions file: a decoded tree or the reason decoding failed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Prediction {
    id: String,
    #[serde(default)]
    tree: Option<String>,
    #[serde(default)]
    failure: Option<String>,
}

#[derive(Debug, Serialize)]
struct TranslationScore {
    examples: usize,
    tree_accuracy: f64,
    token_accuracy: f64,
    failures: usize,
    missing: usize,
}

fn eval_translate(a: EvalTranslateArgs) -> Outcome {
    let split = match a.split.as_deref() {
        None => None,
        Some("train") => Some(Split::Train),
        Some("validation") => Some(Split::Validation),
        Some("test") => Some(Split::Test),
        Some(other) => return Err(usage(format!("unknown split `{other}`"))),
    };
    let file = File::open(&a.corpus).with_context(|| format!("opening {}", a.corpus.display()))?;
    let examples = corpus::read_examples(BufReader::new(file)).map_err(anyhow::Error::from)?;
    let targets: BTreeMap<&str, &corpus::CorpusExample> =
        examples.iter().filter(|e| split.map_or(true, |s| e.split == s)).map(|e| (e.id.as_str(), e)).collect();

    let mut predicted: BTreeMap<String, Prediction> = BTreeMap::new();
    for (i, line) in read(&a.predictions)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction = serde_json::from_str(line).with_context(|| format!("{}:{}", a.predictions.display(), i + 1))?;
        if p.tree.is_some() == p.failure.is_some() {
            return Err(anyhow!("{}:{}: give exactly one of `tree` or `failure`", a.predictions.display(), i + 1).into());
        }
        if !examples.iter().any(|e| e.id == p.id) {
            return Err(anyhow!("{}:{}: id `{}` is not in the corpus", a.predictions.display(), i + 1, p.id).into());
        }
        predicted.insert(p.id.clone(), p);
    }

    let (mut exact, mut token_sum, mut failures, mut missing) = (0usize, 0.0, 0usize, 0usize);
    for (id, target) in &targets {
        let Some(p) = predicted.get(*id) else {
            missing += 1;
            continue;
        };
        let Some(text) = &p.tree else {
            failures += 1;
            continue;
        };
        let target_tree = tree::deserialize(&target.tree).with_context(|| format!("corpus example {id}"))?;
        match tree::deserialize(text).map_err(anyhow::Error::from).and_then(|t| Ok(compare_trees(&t, &target_tree)?)) {
            Ok(c) => {
                exact += usize::from(c.exact_match);
                token_sum += c.token_accuracy;
            }
            Err(_) => failures += 1,
        }
    }
    let n = targets.len();
    let denom = n.max(1) as f64;
    let score = TranslationScore { examples: n, tree_accuracy: exact as f64 / denom, token_accuracy: token_sum / denom, failures, missing };
    let text = serde_json::to_string_pretty(&score).context("serializing score")? + "\n";
    print!("{text}");
    if let Some(out) = &a.out {
        write(out, &text)?;
    }
    Ok(())
}

