//! State directories for multi-invocation runs.
//!
//! ```text
//! <dir>/formatversion      layout version, currently 1
//! <dir>/manifest.json      config, seed, command log with input digests, outputs
//! <dir>/model.txt          cumulative model snapshot
//! <dir>/kb.txt             knowledge base
//! <dir>/selection.tsv      pooled initial selection
//! <dir>/report.tsv         scores for self-study domains with gold labels
//! <dir>/pseudo/<name>.tsv  pseudo-labels per self-study domain
//! ```
//!
//! A `lock` file guards against concurrent writers.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{load_domain, LabelMode};
use crate::engine::{format_pseudo_labels, ConsumedDomain, EngineConfig, LifelongState};
use crate::error::{Error, Result};
use crate::evaluation::{self, EvalReport};
use crate::knowledge::KnowledgeBase;
use crate::model::NbModel;

pub const FORMAT_VERSION: u32 = 1;

const FORMAT_FILE: &str = "formatversion";
const MANIFEST_FILE: &str = "manifest.json";
const MODEL_FILE: &str = "model.txt";
const KB_FILE: &str = "kb.txt";
const SELECTION_FILE: &str = "selection.tsv";
const REPORT_FILE: &str = "report.tsv";
const PSEUDO_DIR: &str = "pseudo";
const LOCK_FILE: &str = "lock";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRef {
    pub name: String,
    pub path: String,
    pub sha256: String,
}

impl InputRef {
    pub fn for_file(name: &str, path: &Path) -> Result<Self> {
        Ok(InputRef {
            name: name.to_owned(),
            path: path.display().to_string(),
            sha256: file_digest(path)?,
        })
    }

    fn verify(&self) -> Result<()> {
        if file_digest(Path::new(&self.path))? != self.sha256 {
            return Err(Error::DigestMismatch {
                path: self.path.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandRecord {
    Initial { inputs: Vec<InputRef> },
    SelfStudy { input: InputRef, gold: Option<InputRef> },
}

/// Everything needed to replay a state directory from its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub seed: u64,
    pub config: EngineConfig,
    pub commands: Vec<CommandRecord>,
    pub consumed: Vec<ConsumedDomain>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn inputs(&self) -> Vec<&InputRef> {
        self.commands
            .iter()
            .flat_map(|c| match c {
                CommandRecord::Initial { inputs } => inputs.iter().collect::<Vec<_>>(),
                CommandRecord::SelfStudy { input, gold } => std::iter::once(input).chain(gold).collect(),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Holds the advisory lock until dropped.
#[derive(Debug)]
pub struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Clone, Debug)]
pub struct StateDir {
    root: PathBuf,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl StateDir {
    /// Creates a fresh state directory; refuses one that already holds a state.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join(PSEUDO_DIR)).map_err(|e| Error::io(&root, e))?;
        let dir = StateDir { root };
        if dir.path(FORMAT_FILE).exists() {
            return Err(Error::InvalidArgument(format!(
                "{} already contains a state",
                dir.root.display()
            )));
        }
        Ok(dir)
    }

    /// Opens an existing state directory, checking its layout version.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let dir = StateDir { root: root.into() };
        let version = read(&dir.path(FORMAT_FILE))?;
        if version.trim() != FORMAT_VERSION.to_string() {
            return Err(Error::VersionMismatch(dir.root.display().to_string()));
        }
        Ok(dir)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.root.join(file)
    }

    pub fn kb_path(&self) -> PathBuf {
        self.path(KB_FILE)
    }

    pub fn pseudo_label_path(&self, domain: &str) -> PathBuf {
        self.root.join(PSEUDO_DIR).join(format!("{domain}.tsv"))
    }

    pub fn lock(&self) -> Result<LockGuard> {
        let path = self.path(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(LockGuard { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(self.root.clone())),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    pub fn load_manifest(&self) -> Result<RunManifest> {
        let path = self.path(MANIFEST_FILE);
        let text = read(&path)?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.line(), e.to_string()))
    }

    pub fn load_kb(&self) -> Result<KnowledgeBase> {
        KnowledgeBase::load(self.kb_path())
    }

    pub fn load_state(&self) -> Result<(LifelongState, RunManifest)> {
        let manifest = self.load_manifest()?;
        let model_path = self.path(MODEL_FILE);
        let file = fs::File::open(&model_path).map_err(|e| Error::io(&model_path, e))?;
        let model = NbModel::read_snapshot(BufReader::new(file), &model_path.display().to_string())?;
        let kb = self.load_kb()?;
        let state = LifelongState::from_parts(model, kb, manifest.consumed.clone(), manifest.config.clone())?;
        Ok((state, manifest))
    }

    pub fn load_report(&self) -> Result<EvalReport> {
        let path = self.path(REPORT_FILE);
        if !path.exists() {
            return Ok(EvalReport::new());
        }
        EvalReport::from_tsv(&read(&path)?, &path.display().to_string())
    }

    fn save(&self, state: &LifelongState, manifest: &mut RunManifest) -> Result<()> {
        write(&self.path(FORMAT_FILE), format!("{FORMAT_VERSION}\n"))?;
        write(&self.path(MODEL_FILE), state.model().to_snapshot_string())?;
        state.kb().save(self.kb_path())?;
        if let Some(sel) = state.initial_selection() {
            let mut buf = Vec::new();
            sel.write_export(&mut buf).expect("writing to a Vec cannot fail");
            write(&self.path(SELECTION_FILE), buf)?;
            manifest.add_output(SELECTION_FILE);
        }
        manifest.consumed = state.consumed().to_vec();
        manifest.add_output(MODEL_FILE);
        manifest.add_output(KB_FILE);
        write(&self.path(MANIFEST_FILE), manifest.to_json())
    }
}

impl RunManifest {
    fn add_output(&mut self, path: &str) {
        if !self.outputs.iter().any(|o| o == path) {
            self.outputs.push(path.to_owned());
        }
    }
}

/// Initial learning from labeled files into a new state directory.
pub fn initial_command(out: &Path, inputs: &[(String, PathBuf)], config: EngineConfig, seed: u64) -> Result<StateDir> {
    config.validate()?;
    if inputs.len() < config.min_initial_domains {
        return Err(Error::InsufficientDomains {
            got: inputs.len(),
            need: config.min_initial_domains,
        });
    }
    let mut corpora = Vec::with_capacity(inputs.len());
    let mut refs = Vec::with_capacity(inputs.len());
    for (name, path) in inputs {
        corpora.push(load_domain(path, name, LabelMode::Labeled)?);
        refs.push(InputRef::for_file(name, path)?);
    }
    let state = LifelongState::initial_learn(&corpora, config.clone())?;

    let dir = StateDir::create(out)?;
    let _lock = dir.lock()?;
    let mut manifest = RunManifest {
        format_version: FORMAT_VERSION,
        seed,
        config,
        commands: vec![CommandRecord::Initial { inputs: refs }],
        consumed: Vec::new(),
        outputs: Vec::new(),
    };
    dir.save(&state, &mut manifest)?;
    Ok(dir)
}

/// Result of one self-study invocation.
#[derive(Clone, Debug)]
pub struct SelfStudySummary {
    pub documents: usize,
    pub single_class: bool,
    pub macro_f1: Option<f64>,
}

/// Self-study of one unlabeled file against an existing state directory.
pub fn self_study_command(dir: &Path, name: &str, input: &Path, gold: Option<&Path>) -> Result<SelfStudySummary> {
    let dir = StateDir::open(dir)?;
    let _lock = dir.lock()?;
    let (mut state, mut manifest) = dir.load_state()?;
    if state.has_consumed(name) {
        return Err(Error::DuplicateDomain(name.to_owned()));
    }
    let corpus = load_domain(input, name, LabelMode::Unlabeled)?;
    let gold_corpus = match gold {
        Some(path) => {
            let g = load_domain(path, name, LabelMode::Labeled)?;
            if g.len() != corpus.len() {
                return Err(Error::LengthMismatch {
                    left: corpus.len(),
                    right: g.len(),
                });
            }
            Some(g)
        }
        None => None,
    };
    let input_ref = InputRef::for_file(name, input)?;
    let gold_ref = gold.map(|p| InputRef::for_file(name, p)).transpose()?;

    let outcome = state.self_study(&corpus)?;
    let pseudo_path = dir.pseudo_label_path(name);
    write(&pseudo_path, format_pseudo_labels(&outcome.pseudo_labels))?;
    manifest.add_output(&format!("{PSEUDO_DIR}/{name}.tsv"));

    let mut macro_f1 = None;
    if let Some(g) = &gold_corpus {
        let scored = if state.config().score_after_refit {
            state.predict(&corpus)
        } else {
            outcome.pseudo_labels.clone()
        };
        let f1 = evaluation::macro_f1(&scored, g.require_labels()?)?;
        let mut report = dir.load_report()?;
        report.seed = manifest.seed;
        report.push(name, evaluation::SYSTEM_LIFELONG, f1);
        write(&dir.path(REPORT_FILE), report.to_tsv())?;
        manifest.add_output(REPORT_FILE);
        macro_f1 = Some(f1);
    }

    manifest.commands.push(CommandRecord::SelfStudy {
        input: input_ref,
        gold: gold_ref,
    });
    dir.save(&state, &mut manifest)?;
    Ok(SelfStudySummary {
        documents: corpus.len(),
        single_class: outcome.single_class,
        macro_f1,
    })
}

/// Re-executes a manifest's command log into `out`, verifying every input digest.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<StateDir> {
    let text = read(manifest_path)?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| Error::parse(manifest_path.display().to_string(), e.line(), e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch(manifest_path.display().to_string()));
    }
    for input in manifest.inputs() {
        input.verify()?;
    }
    let mut commands = manifest.commands.iter();
    let Some(CommandRecord::Initial { inputs }) = commands.next() else {
        return Err(Error::parse(
            manifest_path.display().to_string(),
            0,
            "command log must start with initial",
        ));
    };
    let named: Vec<(String, PathBuf)> = inputs
        .iter()
        .map(|r| (r.name.clone(), PathBuf::from(&r.path)))
        .collect();
    let dir = initial_command(out, &named, manifest.config.clone(), manifest.seed)?;
    for cmd in commands {
        match cmd {
            CommandRecord::SelfStudy { input, gold } => {
                let gold_path = gold.as_ref().map(|g| PathBuf::from(&g.path));
                self_study_command(out, &input.name, Path::new(&input.path), gold_path.as_deref())?;
            }
            CommandRecord::Initial { .. } => {
                return Err(Error::parse(
                    manifest_path.display().to_string(),
                    0,
                    "initial may only appear first in the command log",
                ))
            }
        }
    }
    Ok(dir)
}
