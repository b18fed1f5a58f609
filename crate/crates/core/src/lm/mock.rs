use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendDescriptor, BackendError, BackendKind, CompletionRequest};

/// Scripted completions.
///
/// A request tagged `a|b|c|d` is answered from the `tagged` list under the
/// longest matching prefix (`a|b|c|d`, `a|b|c`, `a|b`, `a`). Each sequence
/// scope, the tag minus its last component, keeps its own cursor, so
/// concurrent participants never disturb each other. Past the end of a
/// list the last entry repeats. Untagged requests draw from `sequence`
/// with one global cursor.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default)]
    pub tagged: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub sequence: Vec<String>,
}

impl MockScript {
    pub fn sequence(texts: impl IntoIterator<Item = impl Into<String>>) -> Self {
        MockScript {
            tagged: BTreeMap::new(),
            sequence: texts.into_iter().map(Into::into).collect(),
        }
    }

    /// Fold `other` in; its lists extend lists under the same tag.
    pub fn merge(&mut self, other: MockScript) {
        for (k, v) in other.tagged {
            self.tagged.entry(k).or_default().extend(v);
        }
        self.sequence.extend(other.sequence);
    }
}

pub struct MockBackend {
    script: MockScript,
    path: Option<PathBuf>,
    cursors: Mutex<HashMap<String, usize>>,
    sequence_cursor: Mutex<usize>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        MockBackend {
            script,
            path: None,
            cursors: Mutex::new(HashMap::new()),
            sequence_cursor: Mutex::new(0),
        }
    }

    /// Load a script file, or every `*.json` script in a directory merged
    /// in file name order. A run's `manifest.json` there is skipped.
    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        let read = |p: &Path| -> Result<MockScript, BackendError> {
            let text = fs::read_to_string(p).map_err(|e| BackendError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| BackendError::Config(format!("{}: {e}", p.display())))
        };
        let mut script = MockScript::default();
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
                .collect();
            files.sort();
            for f in files {
                script.merge(read(&f)?);
            }
        } else {
            script = read(path)?;
        }
        let mut backend = MockBackend::new(script);
        backend.path = Some(path.to_path_buf());
        Ok(backend)
    }

    fn next_tagged(&self, tag: &str) -> Option<String> {
        let parts: Vec<&str> = tag.split('|').collect();
        let list = (1..=parts.len())
            .rev()
            .find_map(|n| self.script.tagged.get(&parts[..n].join("|")))?;
        let scope = parts[..parts.len().saturating_sub(1)].join("|");
        let mut cursors = self.cursors.lock().expect("cursor lock");
        let i = cursors.entry(scope).or_insert(0);
        let text = list.get(*i).or(list.last()).cloned();
        *i += 1;
        text
    }
}

impl Backend for MockBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, BackendError> {
        request.validate()?;
        let mut out = Vec::with_capacity(request.n_candidates);
        for _ in 0..request.n_candidates {
            let text = match self.next_tagged(&request.request_tag) {
                Some(t) => t,
                None => {
                    let mut c = self.sequence_cursor.lock().expect("cursor lock");
                    let t = self
                        .script
                        .sequence
                        .get(*c)
                        .cloned()
                        .ok_or_else(|| BackendError::ScriptExhausted(request.request_tag.clone()))?;
                    *c += 1;
                    t
                }
            };
            out.push(text);
        }
        Ok(out)
    }

    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            kind: BackendKind::Mock,
            endpoint: None,
            credential_env: None,
            cache_path: None,
            script_path: self.path.clone(),
            model_name: None,
        }
    }
}
