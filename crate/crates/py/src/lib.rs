//! Python bindings: vocabulary loading, suite generation, gender
//! classification, logistic fits, report scoring and full pipeline runs.
//!
//! Structured results cross the boundary as plain Python dicts/lists built
//! from the core types' JSON form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use gendial_core::dictclient::{DictClient, LocalTsvProvider};
use gendial_core::gendertag::{classify as core_classify, morphological_fallback, RuleTable};
use gendial_core::metrics::{compute_report, ReportKind};
use gendial_core::pipeline::{
    read_annotations, run_pipeline, OutputFormat, PipelineConfig, SystemOutput,
};
use gendial_core::regress::{fit_logistic as core_fit, FitOptions};
use gendial_core::templgen::{generate_all, TemplateParams};
use gendial_core::vocab::{load_vocabulary_dir, validate_occupation_pairing};
use gendial_core::Language;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_language(code: &str) -> PyResult<Language> {
    Language::from_str(code).map_err(PyValueError::new_err)
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None().into_bound(py),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize_to_py<'py, T: serde::Serialize>(
    py: Python<'py>,
    value: &T,
) -> PyResult<Bound<'py, PyAny>> {
    let json = serde_json::to_value(value).map_err(err)?;
    json_to_py(py, &json)
}

/// Load and validate a vocabulary directory; returns counts, the digest and
/// any pairing violations.
#[pyfunction]
fn load_vocabulary(py: Python<'_>, vocab_dir: &str) -> PyResult<Py<PyDict>> {
    let v = load_vocabulary_dir(Path::new(vocab_dir)).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("adjectives", v.adjectives().len())?;
    dict.set_item("adverbs", v.adverbs().len())?;
    dict.set_item("occupations", v.occupations().len())?;
    dict.set_item("digest", v.digest())?;
    let violations: Vec<String> = validate_occupation_pairing(&v)
        .into_iter()
        .map(|viol| viol.to_string())
        .collect();
    dict.set_item("violations", violations)?;
    Ok(dict.into())
}

/// Generate the suite. `params_json` overrides the full-scale template
/// parameters; when `out` is given the suite and a sources.txt are written
/// there. Returns a summary dict.
#[pyfunction]
#[pyo3(signature = (vocab_dir, seed, params_json=None, out=None))]
fn generate_suite(
    py: Python<'_>,
    vocab_dir: &str,
    seed: u64,
    params_json: Option<&str>,
    out: Option<&str>,
) -> PyResult<Py<PyDict>> {
    let v = load_vocabulary_dir(Path::new(vocab_dir)).map_err(err)?;
    let params: TemplateParams = match params_json {
        Some(json) => serde_json::from_str(json).map_err(err)?,
        None => TemplateParams::default(),
    };
    let suite = generate_all(&v, &params, seed).map_err(err)?;
    if let Some(out) = out {
        let out = PathBuf::from(out);
        gendial_core::pipeline::write_suite(&out, &suite).map_err(err)?;
        gendial_core::pipeline::write_sources(&out.with_file_name("sources.txt"), &suite)
            .map_err(err)?;
    }
    let mut by_kind: BTreeMap<String, usize> = BTreeMap::new();
    for inst in &suite.instances {
        *by_kind.entry(inst.subset_kind.id_prefix().to_string()).or_default() += 1;
    }
    let dict = PyDict::new(py);
    dict.set_item("instances", suite.instances.len())?;
    dict.set_item("slots", suite.instances.iter().map(|i| i.slots.len()).sum::<usize>())?;
    dict.set_item("digest", suite.digest())?;
    dict.set_item("vocabularyDigest", suite.vocabulary_digest.clone())?;
    dict.set_item("byKind", by_kind)?;
    Ok(dict.into())
}

/// Classify one extracted target-language form: dictionary evidence first,
/// morphological fallback second.
#[pyfunction]
#[pyo3(signature = (form, language, source_lemma, dict_dir=None, rules_path=None))]
fn classify_form<'py>(
    py: Python<'py>,
    form: &str,
    language: &str,
    source_lemma: &str,
    dict_dir: Option<&str>,
    rules_path: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let language = parse_language(language)?;
    let provider = match dict_dir {
        Some(dir) => {
            let path = Path::new(dir).join(format!("dict.{}.tsv", language.code()));
            if path.exists() {
                LocalTsvProvider::from_files(&[(language, path)]).map_err(err)?
            } else {
                LocalTsvProvider::empty()
            }
        }
        None => LocalTsvProvider::empty(),
    };
    let dict = DictClient::new(vec![Box::new(provider)]);
    let rules = match rules_path {
        Some(path) => RuleTable::load(Path::new(path)).map_err(err)?,
        None => RuleTable::builtin(language),
    };
    let annotation = core_classify(form, language, &dict, &rules, source_lemma).map_err(err)?;
    serialize_to_py(py, &annotation)
}

/// The ending-rule fallback alone; returns (label, detail) or None.
#[pyfunction]
fn ending_fallback(form: &str, language: &str) -> PyResult<Option<(String, String)>> {
    let language = parse_language(language)?;
    let rules = RuleTable::builtin(language);
    Ok(morphological_fallback(form, &rules)
        .map(|(label, detail)| (format!("{label:?}").to_uppercase(), format!("{detail:?}"))))
}

/// Maximum-likelihood logistic fit; `x` rows must include the intercept
/// column. Returns the coefficient table and fit diagnostics.
#[pyfunction]
#[pyo3(signature = (x, y, terms=None, max_iter=100, tol=1e-8, divergence_guard=15.0))]
fn fit_logistic<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    terms: Option<Vec<String>>,
    max_iter: usize,
    tol: f64,
    divergence_guard: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let width = x.first().map(Vec::len).unwrap_or(0);
    let terms =
        terms.unwrap_or_else(|| (0..width).map(|j| format!("b{j}")).collect::<Vec<String>>());
    if terms.len() != width {
        return Err(PyValueError::new_err(format!(
            "{} terms for {width} columns",
            terms.len()
        )));
    }
    let options = FitOptions {
        max_iter,
        tol,
        divergence_guard,
    };
    let result = core_fit(&x, &y, &terms, &options).map_err(err)?;
    serialize_to_py(py, &result)
}

/// Compute one effect report from an annotations JSONL file.
#[pyfunction]
#[pyo3(signature = (annotations_path, kind, balancing_seed=0))]
fn score_annotations<'py>(
    py: Python<'py>,
    annotations_path: &str,
    kind: &str,
    balancing_seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let records = read_annotations(Path::new(annotations_path)).map_err(err)?;
    let kind = ReportKind::ALL
        .into_iter()
        .find(|k| k.name() == kind)
        .ok_or_else(|| PyValueError::new_err(format!("unknown report kind `{kind}`")))?;
    let report = compute_report(kind, &records, balancing_seed).map_err(err)?;
    serialize_to_py(py, &report)
}

/// Run the full pipeline from a config file over `(system_id, path,
/// language)` outputs; returns the manifest.
#[pyfunction]
fn run<'py>(
    py: Python<'py>,
    config_path: &str,
    systems: Vec<(String, String, String)>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = PipelineConfig::load(Path::new(config_path)).map_err(err)?;
    let systems: Vec<SystemOutput> = systems
        .into_iter()
        .map(|(system_id, path, language)| {
            Ok(SystemOutput {
                system_id,
                path: PathBuf::from(path),
                language: parse_language(&language)?,
                format: OutputFormat::Text,
            })
        })
        .collect::<PyResult<_>>()?;
    let manifest = run_pipeline(&config, &systems).map_err(err)?;
    serialize_to_py(py, &manifest)
}

#[pymodule]
#[pyo3(name = "gendial")]
fn gendial_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(load_vocabulary, m)?)?;
    m.add_function(wrap_pyfunction!(generate_suite, m)?)?;
    m.add_function(wrap_pyfunction!(classify_form, m)?)?;
    m.add_function(wrap_pyfunction!(ending_fallback, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logistic, m)?)?;
    m.add_function(wrap_pyfunction!(score_annotations, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
