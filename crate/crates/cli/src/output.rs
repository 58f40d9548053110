use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::commands::{execute, Command, ReplayArgs};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Internal,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Input,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Input => 2,
            ErrorKind::Internal => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let kind = match self.kind {
            ErrorKind::Input => "input",
            ErrorKind::Internal => "internal",
        };
        serde_json::json!({ "error": self.message, "kind": kind }).to_string()
    }
}

impl From<mmlab_core::Error> for CliError {
    fn from(e: mmlab_core::Error) -> Self {
        if e.is_input_error() {
            CliError::input(e.to_string())
        } else {
            CliError::internal(e.to_string())
        }
    }
}

/// What a command produced, before it is written out.
pub struct Produced {
    pub body: String,
    pub inputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    /// Raised after the output is written (e.g. `validate` with violations).
    pub failure: Option<CliError>,
}

impl Produced {
    pub fn json<T: Serialize>(value: &T) -> Result<Self, CliError> {
        let body = serde_json::to_string(value).map_err(|e| CliError::internal(e.to_string()))? + "\n";
        Ok(Produced {
            body,
            inputs: Vec::new(),
            seed: None,
            failure: None,
        })
    }

    pub fn text(body: String) -> Self {
        Produced {
            body,
            inputs: Vec::new(),
            seed: None,
            failure: None,
        }
    }

    pub fn inputs(mut self, inputs: &[&Path]) -> Self {
        self.inputs = inputs.iter().map(|p| p.to_path_buf()).collect();
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Record written beside every output file; replaying it reproduces the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
    pub tool_version: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn run(command: Command) -> Result<(), CliError> {
    let command = match command {
        Command::Replay(args) => replay_command(&args)?,
        other => other,
    };
    let produced = execute(&command)?;
    match command.out() {
        Some(out) => {
            write(out, &produced.body)?;
            let manifest = manifest_for(&command, &produced)?;
            let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::internal(e.to_string()))? + "\n";
            write(&manifest_path(out), &text)?;
        }
        None => print!("{}", produced.body),
    }
    match produced.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))
}

fn manifest_for(command: &Command, produced: &Produced) -> Result<ExperimentManifest, CliError> {
    let tagged = serde_json::to_value(command).map_err(|e| CliError::internal(e.to_string()))?;
    let name = tagged["command"].as_str().unwrap_or_default().to_string();
    let parameters = match &tagged["parameters"] {
        Value::Object(map) => map.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        _ => BTreeMap::new(),
    };
    Ok(ExperimentManifest {
        command: name,
        inputs: produced.inputs.clone(),
        seed: produced.seed,
        parameters,
        tool_version: TOOL_VERSION.to_string(),
    })
}

fn replay_command(args: &ReplayArgs) -> Result<Command, CliError> {
    let text = read(&args.manifest)?;
    let manifest: ExperimentManifest =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed manifest: {e}")))?;
    if manifest.tool_version != TOOL_VERSION {
        log::warn!(
            "manifest was written by version {}, replaying with {TOOL_VERSION}",
            manifest.tool_version
        );
    }
    let mut parameters = manifest.parameters;
    if let Some(out) = &args.out {
        parameters.insert("out".into(), Value::String(out.display().to_string()));
    }
    let tagged = serde_json::json!({ "command": manifest.command, "parameters": parameters });
    serde_json::from_value(tagged).map_err(|e| CliError::input(format!("manifest does not describe a command: {e}")))
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

/// Memoized generator output under `MMLAB_CACHE_DIR`, keyed by a hash of the
/// descriptor and tool version.
pub fn cached(descriptor: &str, make: impl FnOnce() -> Result<String, CliError>) -> Result<String, CliError> {
    let Some(dir) = std::env::var_os("MMLAB_CACHE_DIR") else {
        return make();
    };
    let key = hex::encode(Sha256::digest(format!("{TOOL_VERSION}\n{descriptor}")));
    let path = Path::new(&dir).join(format!("{key}.json"));
    if let Ok(text) = fs::read_to_string(&path) {
        log::info!("cache hit {}", path.display());
        return Ok(text);
    }
    let text = make()?;
    if let Err(e) = fs::create_dir_all(&dir).and_then(|_| fs::write(&path, &text)) {
        log::warn!("cannot write cache entry {}: {e}", path.display());
    }
    Ok(text)
}
