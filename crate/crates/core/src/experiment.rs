//! Manifest-driven batch runs: training curves and verification reports.
//!
//! A manifest is flat `key = value` text; `#` starts a comment and paths are
//! relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::env::{ProblemInstance, TaxiEnv};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::logic::Substitution;
use crate::planner::ground_all;
use crate::rl::{train, Agents, Domain, TrainConfig, TrainOutcome, Variant};
use crate::verifier::{
    check_factorization, check_soundness, check_value_equivalence, phase_mdp, EQUIVALENCE_TOL,
};

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentManifest {
    pub path: PathBuf,
    pub dfoci: PathBuf,
    pub operators: PathBuf,
    pub instance: PathBuf,
    /// Label used in output file names; defaults to the instance file stem.
    pub task: String,
    pub variants: Vec<Variant>,
    pub train: TrainConfig,
    pub depth: Option<usize>,
    pub out: PathBuf,
    /// Directory of tables from an earlier run, laid out as
    /// `<variant>/seed<n>/<subtask>.q`.
    pub load: Option<PathBuf>,
    pub tol: f64,
    pub max_states: usize,
}

const KEYS: [&str; 20] = [
    "dfoci",
    "operators",
    "instance",
    "task",
    "variants",
    "alpha",
    "epsilon_start",
    "epsilon_end",
    "epsilon_decay_steps",
    "gamma",
    "seeds",
    "total_env_steps",
    "eval_every",
    "eval_episodes",
    "option_budget",
    "depth",
    "out",
    "load",
    "tol",
    "max_states",
];

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

/// `0,1,2` or a half-open range `0..5`.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = v.split_once("..") {
        let (a, b): (u64, u64) = (number("seeds", a.trim())?, number("seeds", b.trim())?);
        return Ok((a..b).collect());
    }
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| number("seeds", s.trim()))
        .collect()
}

impl ExperimentManifest {
    pub fn parse(text: &str, path: &Path) -> Result<ExperimentManifest> {
        let base = path.parent().unwrap_or(Path::new("."));
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Syntax {
                line: n + 1,
                col: 1,
                msg: "expected `key = value`".into(),
            })?;
            let k = k.trim();
            let key = KEYS
                .iter()
                .find(|x| **x == k)
                .ok_or_else(|| Error::Config(format!("line {}: unknown key `{k}`", n + 1)))?;
            if kv.insert(key, v.trim().to_owned()).is_some() {
                return Err(Error::Config(format!("line {}: `{k}` given twice", n + 1)));
            }
        }
        let path_of = |k: &str| kv.get(k).map(|v| base.join(v));
        let required = |k: &str| path_of(k).ok_or_else(|| Error::Config(format!("missing `{k}`")));
        let instance = required("instance")?;
        let mut train = TrainConfig::default();
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = kv.get(stringify!($field)) {
                    train.$field = number(stringify!($field), v)?;
                }
            };
        }
        set!(alpha);
        set!(epsilon_start);
        set!(epsilon_end);
        set!(epsilon_decay_steps);
        set!(gamma);
        set!(total_env_steps);
        set!(eval_every);
        set!(eval_episodes);
        set!(option_budget);
        if let Some(v) = kv.get("seeds") {
            train.seeds = parse_seeds(v)?;
        }
        let variants = match kv.get("variants") {
            Some(v) => v
                .split(',')
                .map(|s| Variant::parse(s.trim()))
                .collect::<Result<Vec<_>>>()?,
            None => vec![Variant::Reprel],
        };
        Ok(ExperimentManifest {
            path: path.to_path_buf(),
            dfoci: required("dfoci")?,
            operators: required("operators")?,
            task: kv.get("task").cloned().unwrap_or_else(|| {
                instance
                    .file_stem()
                    .map_or("task".into(), |s| s.to_string_lossy().into_owned())
            }),
            instance,
            variants,
            train,
            depth: kv.get("depth").map(|v| number("depth", v)).transpose()?,
            out: path_of("out").unwrap_or_else(|| base.join("results")),
            load: path_of("load"),
            tol: kv.get("tol").map_or(Ok(EQUIVALENCE_TOL), |v| number("tol", v))?,
            max_states: kv
                .get("max_states")
                .map_or(Ok(DEFAULT_MAX_STATES), |v| number("max_states", v))?,
        })
    }

    pub fn load(path: &Path) -> Result<ExperimentManifest> {
        ExperimentManifest::parse(&crate::error::read_text(path)?, path)
    }

    /// Loads and validates every referenced file.
    pub fn prepare(&self) -> Result<(Domain, TaxiEnv)> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol {} must be positive", self.tol)));
        }
        self.train.validate()?;
        let domain = Domain::load(&self.dfoci, &self.operators, self.depth)?;
        let env = TaxiEnv::new(ProblemInstance::load(&self.instance)?, self.train.gamma)?;
        if let Some(dir) = &self.load {
            if !dir.is_dir() {
                return Err(Error::Config(format!("load directory {} does not exist", dir.display())));
            }
        }
        Ok((domain, env))
    }

    pub fn label(&self, variant: Variant) -> String {
        match self.load {
            Some(_) => format!("{variant}+T"),
            None => variant.to_string(),
        }
    }
}

/// Everything a training run writes, keyed by path relative to `out`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputSet {
    pub files: BTreeMap<PathBuf, String>,
}

impl OutputSet {
    /// Writes all files into a staging directory next to `out`, then moves
    /// them into place. On failure nothing new is left behind.
    pub fn commit(&self, out: &Path) -> Result<()> {
        let parent = match out.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
        let staging = tempfile::Builder::new()
            .prefix(".reprel-staging-")
            .tempdir_in(&parent)
            .map_err(|e| Error::io(&parent, e))?;
        for (rel, text) in &self.files {
            let p = staging.path().join(rel);
            if let Some(d) = p.parent() {
                std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
            }
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        let mut moved: Vec<PathBuf> = Vec::new();
        let result = (|| {
            for rel in self.files.keys() {
                let dst = out.join(rel);
                if let Some(d) = dst.parent() {
                    std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
                }
                std::fs::rename(staging.path().join(rel), &dst).map_err(|e| Error::io(&dst, e))?;
                moved.push(dst);
            }
            Ok(())
        })();
        if result.is_err() {
            for p in moved {
                let _ = std::fs::remove_file(p);
            }
        }
        result
    }
}

#[derive(Debug)]
pub struct TrainReport {
    pub outcomes: Vec<(String, TrainOutcome)>,
    pub outputs: OutputSet,
}

/// Table directory for one seed of one variant.
pub fn table_dir(root: &Path, variant: &str, seed: u64) -> PathBuf {
    root.join(variant).join(format!("seed{seed}"))
}

/// Trains every variant of the manifest and assembles (but does not write)
/// the output files: one curve CSV per variant, a per-seed summary, and the
/// learned tables.
pub fn run_train(m: &ExperimentManifest, exec: Execution) -> Result<TrainReport> {
    let (domain, env) = m.prepare()?;
    let mut outcomes = Vec::new();
    let mut outputs = OutputSet::default();
    let mut summary = String::from("variant,task,seed,steps_to_optimal,final_mean_reward\n");
    for &variant in &m.variants {
        let label = m.label(variant);
        let init = match &m.load {
            None => Vec::new(),
            Some(dir) => m
                .train
                .seeds
                .iter()
                .map(|&s| {
                    let mut a = Agents::new(variant, &domain, env.available_actions(), m.train.option_budget);
                    a.load(&table_dir(dir, variant.name(), s))?;
                    Ok(Some(a))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let outcome = train(variant, &domain, &env, &m.train, init, exec)?;
        outputs
            .files
            .insert(PathBuf::from(format!("{label}_{}.csv", m.task)), outcome.curve.to_csv());
        for run in &outcome.runs {
            let steps = run.steps_to_optimal.map_or("none".to_owned(), |s| s.to_string());
            let last = run.evals.last().map_or(0.0, |e| e.1);
            let _ = writeln!(summary, "{label},{},{},{steps},{last:.6}", m.task, run.seed);
            for (stem, table) in run.agents.tables() {
                let rel = table_dir(Path::new("tables"), &label, run.seed).join(format!("{stem}.q"));
                outputs.files.insert(rel, table.to_text());
            }
        }
        outcomes.push((label, outcome));
    }
    outputs
        .files
        .insert(PathBuf::from(format!("summary_{}.csv", m.task)), summary);
    Ok(TrainReport { outcomes, outputs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub lines: Vec<String>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

const WITNESS_LIMIT: usize = 5;

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

/// Soundness of the statements, then per ground sub-task: factorization of
/// the derived split and optimal-value equivalence on the sub-task's phase.
pub fn run_verify(m: &ExperimentManifest, tol: Option<f64>) -> Result<VerifyReport> {
    let (domain, env) = m.prepare()?;
    let tol = tol.unwrap_or(m.tol);
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config(format!("tol {tol} must be positive")));
    }
    verify_domain(&domain, &env, tol, m.max_states)
}

pub fn verify_domain(
    domain: &Domain,
    env: &TaxiEnv,
    tol: f64,
    max_states: usize,
) -> Result<VerifyReport> {
    let decl = &domain.decl;
    let full = env.enumerate(max_states)?;
    let mut lines = vec![format!(
        "instance states={} actions={} start_states={}",
        full.num_states(),
        full.num_actions(),
        full.initial.len()
    )];
    let mut passed = true;
    let global = check_soundness(&full, decl, None)?;
    passed &= global.passed();
    lines.push(format!(
        "soundness scope=global checked={} violations={} {}",
        global.checked,
        global.violations.len(),
        verdict(global.passed())
    ));
    for v in global.violations.iter().take(WITNESS_LIMIT) {
        lines.push(format!(
            "witness statement={} atom={} action={} state={} other={}",
            v.statement + 1,
            v.atom,
            full.actions[v.action],
            full.states[v.state],
            full.states[v.witness]
        ));
    }
    for ground in ground_all(&domain.operators.operators, &env.objects())? {
        let step = &ground.name;
        let schema = &domain.schemas[&step.predicate];
        let mdp = phase_mdp(env, &full, &ground, max_states)?;
        let theta = crate::logic::match_atom(&schema.subtask, step, Substitution::new())
            .ok_or_else(|| Error::Grounding(format!("{step} does not instantiate {}", schema.subtask)))?;
        lines.push(format!(
            "phase {step} states={} start_states={}",
            mdp.num_states(),
            mdp.initial.len()
        ));

        let (x, y) = crate::abstraction::partition(schema, &mdp.atom_universe(), &theta)?;
        let fact = check_factorization(&mdp, &x, &y)?;
        passed &= fact.passed();
        lines.push(format!(
            "factorization phase={step} kept={} dropped={} groups={} violations={} {}",
            x.len(),
            y.len(),
            fact.groups,
            fact.violations.len(),
            verdict(fact.passed())
        ));
        lines.extend(fact.witness_lines(&mdp, WITNESS_LIMIT));

        let eq = check_value_equivalence(&mdp, schema, &theta, tol)?;
        passed &= eq.passed();
        lines.push(format!(
            "equivalence phase={step} classes={} max_deviation={:e} tol={:e} {}",
            eq.classes,
            eq.max_deviation,
            tol,
            verdict(eq.passed())
        ));
        if let Some(w) = eq.worst_state.filter(|_| !eq.passed()) {
            lines.push(format!("witness deviation={:e} state={}", eq.max_deviation, mdp.states[w]));
        }

        let sound = check_soundness(&mdp, decl, Some(step))?;
        passed &= sound.passed();
        lines.push(format!(
            "soundness scope={step} checked={} violations={} {}",
            sound.checked,
            sound.violations.len(),
            verdict(sound.passed())
        ));
        for v in sound.violations.iter().take(WITNESS_LIMIT) {
            lines.push(format!(
                "witness statement={} atom={} action={} state={} other={}",
                v.statement + 1,
                v.atom,
                mdp.actions[v.action],
                mdp.states[v.state],
                mdp.states[v.witness]
            ));
        }
    }
    lines.push(format!("result {}", verdict(passed)));
    Ok(VerifyReport { lines, passed })
}
