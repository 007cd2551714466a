//! Dictionary resolution of target-language word forms, via pluggable
//! providers with a persistent append-only cache.
//!
//! The offline-first provider is a local TSV dictionary per language; a
//! generic HTTP provider adapter (URL template + JSON field mapping) covers
//! hosted dictionaries. Providers are queried in configured order and the
//! first found result wins; a cache hit never contacts a provider.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Language;

/// Grammatical gender of one dictionary reading of a surface form.
/// `Epicene` marks forms valid for both M and F referents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GenderOfForm {
    M,
    F,
    N,
    Epicene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Adjective,
    Noun,
    Verb,
    Adverb,
    Other,
}

impl PartOfSpeech {
    fn parse(s: &str) -> PartOfSpeech {
        match s.to_ascii_lowercase().as_str() {
            "adj" | "adjective" => PartOfSpeech::Adjective,
            "noun" | "n" | "subst" => PartOfSpeech::Noun,
            "verb" | "v" => PartOfSpeech::Verb,
            "adv" | "adverb" => PartOfSpeech::Adverb,
            _ => PartOfSpeech::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Reading {
    pub lemma: String,
    pub part_of_speech: PartOfSpeech,
    pub gender_of_form: GenderOfForm,
}

/// What the dictionaries say about one queried surface form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DictionaryEvidence {
    pub form: String,
    pub language: Language,
    pub found: bool,
    pub readings: Vec<Reading>,
    pub provider: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CacheEntry {
    language: Language,
    form: String,
    value: DictionaryEvidence,
    fetched_at: u64,
}

#[derive(Debug, Error)]
pub enum DictError {
    #[error("empty form passed to lookup")]
    EmptyForm,
    #[error("all providers unavailable for `{form}` ({language}): {detail}")]
    ProviderUnavailable {
        form: String,
        language: Language,
        detail: String,
    },
    #[error("failed to warm cache: {fetched} fetched, unfetched forms: {unfetched:?}")]
    WarmCachePartialFailure {
        fetched: usize,
        unfetched: Vec<String>,
    },
    #[error("dictionary file {path}: {reason}")]
    BadDictionaryFile { path: PathBuf, reason: String },
    #[error("cache io on {path}: {source}")]
    CacheIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A dictionary source. `Ok(None)` means the provider answered and the form
/// is not in the dictionary; `Err` means the provider could not answer.
pub trait Provider: Send + Sync {
    fn id(&self) -> &str;
    fn lookup(&self, form: &str, language: Language) -> Result<Option<Vec<Reading>>, String>;
    /// Number of lookups that reached this provider; lets tests verify that
    /// cache hits never contact a provider.
    fn call_count(&self) -> usize;
}

/// Offline TSV dictionary: `form<TAB>lemma<TAB>pos<TAB>gender` per language.
pub struct LocalTsvProvider {
    id: String,
    entries: HashMap<(Language, String), Vec<Reading>>,
    calls: AtomicUsize,
}

impl LocalTsvProvider {
    pub fn from_files(files: &[(Language, PathBuf)]) -> Result<Self, DictError> {
        let mut entries: HashMap<(Language, String), Vec<Reading>> = HashMap::new();
        for (language, path) in files {
            let text = fs::read_to_string(path).map_err(|e| DictError::BadDictionaryFile {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            for (idx, line) in text.lines().enumerate() {
                if idx == 0 || line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() != 4 {
                    return Err(DictError::BadDictionaryFile {
                        path: path.clone(),
                        reason: format!("line {}: expected 4 columns, got {}", idx + 1, cols.len()),
                    });
                }
                let gender = match cols[3].to_ascii_lowercase().as_str() {
                    "m" => GenderOfForm::M,
                    "f" => GenderOfForm::F,
                    "n" => GenderOfForm::N,
                    "epicene" | "mf" | "common" => GenderOfForm::Epicene,
                    other => {
                        return Err(DictError::BadDictionaryFile {
                            path: path.clone(),
                            reason: format!("line {}: unknown gender `{other}`", idx + 1),
                        })
                    }
                };
                entries
                    .entry((*language, cols[0].to_lowercase()))
                    .or_default()
                    .push(Reading {
                        lemma: cols[1].to_string(),
                        part_of_speech: PartOfSpeech::parse(cols[2]),
                        gender_of_form: gender,
                    });
            }
        }
        Ok(LocalTsvProvider {
            id: "local".to_string(),
            entries,
            calls: AtomicUsize::new(0),
        })
    }

    pub fn empty() -> Self {
        LocalTsvProvider {
            id: "local".to_string(),
            entries: HashMap::new(),
            calls: AtomicUsize::new(0),
        }
    }
}

impl Provider for LocalTsvProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn lookup(&self, form: &str, language: Language) -> Result<Option<Vec<Reading>>, String> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.entries.get(&(language, form.to_lowercase())).cloned())
    }

    fn call_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Generic HTTP dictionary adapter: a URL template with `{form}` and
/// `{lang}` placeholders, plain HTTP/1.1 GET, and a JSON field mapping that
/// names where the readings array and its lemma/pos/gender fields live.
///
/// TLS is out of scope; the adapter targets self-hosted or proxied
/// dictionary services. A 404 counts as found=false, any transport or
/// parse failure as provider-unavailable.
pub struct HttpJsonProvider {
    id: String,
    url_template: String,
    mapping: HttpFieldMapping,
    timeout: Duration,
    calls: AtomicUsize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HttpFieldMapping {
    /// Field holding the array of readings (top-level when empty).
    #[serde(default)]
    pub readings_field: String,
    pub lemma_field: String,
    pub pos_field: String,
    pub gender_field: String,
}

impl HttpJsonProvider {
    pub fn new(
        id: impl Into<String>,
        url_template: impl Into<String>,
        mapping: HttpFieldMapping,
        timeout: Duration,
    ) -> Self {
        HttpJsonProvider {
            id: id.into(),
            url_template: url_template.into(),
            mapping,
            timeout,
            calls: AtomicUsize::new(0),
        }
    }

    fn fetch(&self, url: &str) -> Result<(u16, Vec<u8>), String> {
        let rest = url
            .strip_prefix("http://")
            .ok_or_else(|| format!("only http:// URLs are supported, got {url}"))?;
        let (host_port, path) = match rest.split_once('/') {
            Some((h, p)) => (h, format!("/{p}")),
            None => (rest, "/".to_string()),
        };
        let addr = if host_port.contains(':') {
            host_port.to_string()
        } else {
            format!("{host_port}:80")
        };
        let mut stream = TcpStream::connect(&addr).map_err(|e| e.to_string())?;
        stream.set_read_timeout(Some(self.timeout)).ok();
        stream.set_write_timeout(Some(self.timeout)).ok();
        let request = format!(
            "GET {path} HTTP/1.1\r\nHost: {host_port}\r\nAccept: application/json\r\nConnection: close\r\n\r\n"
        );
        stream.write_all(request.as_bytes()).map_err(|e| e.to_string())?;
        let mut response = Vec::new();
        stream.read_to_end(&mut response).map_err(|e| e.to_string())?;
        let header_end = response
            .windows(4)
            .position(|w| w == b"\r\n\r\n")
            .ok_or("malformed HTTP response")?;
        let head = String::from_utf8_lossy(&response[..header_end]).to_string();
        let status: u16 = head
            .split_whitespace()
            .nth(1)
            .and_then(|s| s.parse().ok())
            .ok_or("missing HTTP status")?;
        Ok((status, response[header_end + 4..].to_vec()))
    }

    fn parse_readings(&self, body: &[u8]) -> Result<Vec<Reading>, String> {
        let json: serde_json::Value = serde_json::from_slice(body).map_err(|e| e.to_string())?;
        let array = if self.mapping.readings_field.is_empty() {
            &json
        } else {
            json.get(&self.mapping.readings_field)
                .ok_or_else(|| format!("missing field `{}`", self.mapping.readings_field))?
        };
        let items = array.as_array().ok_or("readings field is not an array")?;
        let mut readings = Vec::new();
        for item in items {
            let get = |field: &str| -> Result<String, String> {
                item.get(field)
                    .and_then(|v| v.as_str())
                    .map(str::to_string)
                    .ok_or_else(|| format!("missing field `{field}` in reading"))
            };
            let gender = match get(&self.mapping.gender_field)?.to_ascii_lowercase().as_str() {
                "m" => GenderOfForm::M,
                "f" => GenderOfForm::F,
                "n" => GenderOfForm::N,
                "epicene" | "mf" | "common" => GenderOfForm::Epicene,
                other => return Err(format!("unknown gender `{other}` in response")),
            };
            readings.push(Reading {
                lemma: get(&self.mapping.lemma_field)?,
                part_of_speech: PartOfSpeech::parse(&get(&self.mapping.pos_field)?),
                gender_of_form: gender,
            });
        }
        Ok(readings)
    }
}

impl Provider for HttpJsonProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn lookup(&self, form: &str, language: Language) -> Result<Option<Vec<Reading>>, String> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let url = self
            .url_template
            .replace("{form}", form)
            .replace("{lang}", language.code());
        let (status, body) = self.fetch(&url)?;
        match status {
            404 => Ok(None),
            200 => {
                let readings = self.parse_readings(&body)?;
                Ok(if readings.is_empty() { None } else { Some(readings) })
            }
            other => Err(format!("HTTP status {other}")),
        }
    }

    fn call_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Provider chain with a persistent JSON-lines cache. Many readers; writes
/// serialized through a single appender; replay is last-write-wins.
pub struct DictClient {
    providers: Vec<Box<dyn Provider>>,
    cache: RwLock<HashMap<(Language, String), DictionaryEvidence>>,
    cache_file: Mutex<Option<(PathBuf, fs::File)>>,
}

impl DictClient {
    pub fn new(providers: Vec<Box<dyn Provider>>) -> Self {
        DictClient {
            providers,
            cache: RwLock::new(HashMap::new()),
            cache_file: Mutex::new(None),
        }
    }

    /// Attach a persistent cache file, replaying any existing entries.
    pub fn with_cache_file(self, path: &Path) -> Result<Self, DictError> {
        let mut map = HashMap::new();
        if path.exists() {
            let file = fs::File::open(path).map_err(|source| DictError::CacheIo {
                path: path.to_path_buf(),
                source,
            })?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|source| DictError::CacheIo {
                    path: path.to_path_buf(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                // tolerate a trailing partial line from a crashed writer
                if let Ok(entry) = serde_json::from_str::<CacheEntry>(&line) {
                    map.insert((entry.language, entry.form.clone()), entry.value);
                }
            }
        }
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| DictError::CacheIo {
                path: path.to_path_buf(),
                source,
            })?;
        *self.cache.write().expect("cache lock") = map;
        *self.cache_file.lock().expect("cache file lock") = Some((path.to_path_buf(), file));
        Ok(self)
    }

    pub fn providers(&self) -> &[Box<dyn Provider>] {
        &self.providers
    }

    fn persist(&self, entry: &CacheEntry) -> Result<(), DictError> {
        let mut guard = self.cache_file.lock().expect("cache file lock");
        if let Some((path, file)) = guard.as_mut() {
            let line = serde_json::to_string(entry).expect("cache entry serializes");
            writeln!(file, "{line}").map_err(|source| DictError::CacheIo {
                path: path.clone(),
                source,
            })?;
        }
        Ok(())
    }

    /// Cached evidence if present, otherwise the first found provider answer
    /// (or a merged not-found), cached either way.
    pub fn lookup(&self, form: &str, language: Language) -> Result<DictionaryEvidence, DictError> {
        let normalized = form.trim();
        if normalized.is_empty() {
            return Err(DictError::EmptyForm);
        }
        let key = (language, normalized.to_lowercase());
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }

        let mut failures = Vec::new();
        let mut evidence = None;
        for provider in &self.providers {
            // lowercase first, retry original casing on a miss
            let attempt = match provider.lookup(&key.1, language) {
                Ok(Some(readings)) => Some(readings),
                Ok(None) if normalized != key.1 => {
                    match provider.lookup(normalized, language) {
                        Ok(found) => found,
                        Err(e) => {
                            failures.push(format!("{}: {e}", provider.id()));
                            continue;
                        }
                    }
                }
                Ok(None) => None,
                Err(e) => {
                    failures.push(format!("{}: {e}", provider.id()));
                    continue;
                }
            };
            match attempt {
                Some(readings) => {
                    evidence = Some(DictionaryEvidence {
                        form: normalized.to_string(),
                        language,
                        found: true,
                        readings,
                        provider: provider.id().to_string(),
                    });
                    break;
                }
                None => {
                    // remember that at least one provider answered not-found
                    evidence.get_or_insert(DictionaryEvidence {
                        form: normalized.to_string(),
                        language,
                        found: false,
                        readings: Vec::new(),
                        provider: provider.id().to_string(),
                    });
                }
            }
        }

        let evidence = match evidence {
            Some(e) => e,
            None => {
                return Err(DictError::ProviderUnavailable {
                    form: normalized.to_string(),
                    language,
                    detail: failures.join("; "),
                })
            }
        };
        let entry = CacheEntry {
            language,
            form: key.1.clone(),
            value: evidence.clone(),
            fetched_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        self.persist(&entry)?;
        self.cache.write().expect("cache lock").insert(key, evidence.clone());
        Ok(evidence)
    }

    /// Ensure every form has a cache entry; returns how many were newly
    /// fetched. Forms no provider could answer are reported together.
    pub fn warm_cache(&self, forms: &[String], language: Language) -> Result<usize, DictError> {
        let mut fetched = 0;
        let mut unfetched = Vec::new();
        for form in forms {
            let key = (language, form.trim().to_lowercase());
            if self.cache.read().expect("cache lock").contains_key(&key) {
                continue;
            }
            match self.lookup(form, language) {
                Ok(_) => fetched += 1,
                Err(DictError::EmptyForm) | Err(DictError::ProviderUnavailable { .. }) => {
                    unfetched.push(form.clone())
                }
                Err(e) => return Err(e),
            }
        }
        if unfetched.is_empty() {
            Ok(fetched)
        } else {
            Err(DictError::WarmCachePartialFailure { fetched, unfetched })
        }
    }
}
