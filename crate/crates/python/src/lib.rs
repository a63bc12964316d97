use std::collections::BTreeMap;
use std::fs;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use ::tbix::analysis::{self, GainReport};
use ::tbix::corpus::QueryError;
use ::tbix::format::IndexFile;
use ::tbix::{
    engine, BlockIndex, BloomModel, Corpus, ExactModel, InvertedIndex, MembershipModel, Query,
    Scope, TieredIndex, Vocabulary,
};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A tokenized document collection.
#[pyclass(name = "Corpus", module = "tbix", frozen)]
struct PyCorpus {
    inner: Corpus,
}

#[pymethods]
impl PyCorpus {
    #[new]
    fn new(texts: Vec<String>) -> PyResult<Self> {
        Corpus::from_texts(texts)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    /// One document per non-blank line.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let file = fs::File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Corpus::ingest(std::io::BufReader::new(file))
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn doc_count(&self) -> usize {
        self.inner.doc_count()
    }

    #[getter]
    fn term_count(&self) -> usize {
        self.inner.term_count()
    }

    fn __len__(&self) -> usize {
        self.inner.doc_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus(docs={}, terms={})",
            self.inner.doc_count(),
            self.inner.term_count()
        )
    }
}

#[pyclass(name = "QueryResult", module = "tbix", frozen, get_all)]
struct PyQueryResult {
    doc_ids: Vec<u32>,
    candidates_scanned: u64,
    model_probes: u64,
    guaranteed: Option<bool>,
    used_fallback: Option<bool>,
    unknown_terms: bool,
}

#[pymethods]
impl PyQueryResult {
    fn __repr__(&self) -> String {
        format!(
            "QueryResult(doc_ids={:?}, candidates_scanned={}, model_probes={})",
            self.doc_ids, self.candidates_scanned, self.model_probes
        )
    }
}

impl From<engine::QueryResult> for PyQueryResult {
    fn from(r: engine::QueryResult) -> Self {
        Self {
            doc_ids: r.doc_ids,
            candidates_scanned: r.candidates_scanned,
            model_probes: r.model_probes,
            guaranteed: r.guaranteed,
            used_fallback: r.used_fallback,
            unknown_terms: r.unknown_terms,
        }
    }
}

/// Compressed inverted index with its vocabulary.
#[pyclass(name = "Index", module = "tbix", frozen)]
struct PyIndex {
    index: InvertedIndex,
    vocab: Vocabulary,
}

impl PyIndex {
    /// Queries made only of unknown tokens still parse; they match nothing.
    fn parse(&self, text: &str) -> PyResult<Query> {
        match self.vocab.parse_query(text) {
            Ok(q) => Ok(q),
            Err(QueryError::UnknownTerms(unknown)) => Ok(Query {
                terms: Vec::new(),
                unknown,
            }),
            Err(e) => Err(value_err(e)),
        }
    }

    fn term(&self, token: &str) -> PyResult<u32> {
        self.vocab
            .term_id(token)
            .ok_or_else(|| PyKeyError::new_err(token.to_string()))
    }
}

fn gain_dict(r: &GainReport) -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("k", f64::from(r.k)),
        ("replaced", r.replaced_count as f64),
        ("trunc_bits", r.trunc_list_size_bits),
        ("gain_upper", r.gain_upper_bits),
        ("gain_lower", r.gain_lower_bits),
        ("measured_trunc_bits", r.measured_trunc_bits as f64),
    ])
}

#[pymethods]
impl PyIndex {
    #[new]
    fn new(corpus: &PyCorpus) -> Self {
        Self {
            index: InvertedIndex::build(&corpus.inner),
            vocab: corpus.inner.vocabulary(),
        }
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let bytes = fs::read(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        let file = IndexFile::from_bytes(&bytes).map_err(value_err)?;
        let vocab = file
            .vocab
            .ok_or_else(|| PyValueError::new_err(format!("{path}: no vocabulary section")))?;
        Ok(Self {
            index: file.index,
            vocab,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let file = IndexFile::new(self.index.clone(), Some(self.vocab.clone()));
        fs::write(path, file.to_bytes()).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))
    }

    #[getter]
    fn doc_count(&self) -> usize {
        self.index.doc_count()
    }

    #[getter]
    fn term_count(&self) -> usize {
        self.index.term_count()
    }

    #[getter]
    fn total_bits(&self) -> u64 {
        self.index.total_bits()
    }

    fn df(&self, token: &str) -> PyResult<u32> {
        Ok(self.index.df(self.term(token)?))
    }

    fn postings(&self, token: &str) -> PyResult<Vec<u32>> {
        Ok(self.index.postings(self.term(token)?).into_vec())
    }

    /// Runs one conjunctive query. `strategy` is oracle, exhaustive, tiered
    /// or block; `model` is exact or bloom.
    #[pyo3(signature = (text, strategy = "oracle", *, k = None, beta = None, hybrid = 0,
        model = "exact", bits_per_pair = 16, fallback = false))]
    #[allow(clippy::too_many_arguments)]
    fn query(
        &self,
        py: Python<'_>,
        text: &str,
        strategy: &str,
        k: Option<u32>,
        beta: Option<u32>,
        hybrid: u32,
        model: &str,
        bits_per_pair: u32,
        fallback: bool,
    ) -> PyResult<PyQueryResult> {
        let q = self.parse(text)?;
        if fallback && strategy != "tiered" {
            return Err(PyValueError::new_err("fallback requires strategy='tiered'"));
        }
        let need = |v: Option<u32>, name: &str| {
            v.ok_or_else(|| PyValueError::new_err(format!("strategy '{strategy}' needs {name}")))
        };
        let build_model = |scope: Scope| -> PyResult<Box<dyn MembershipModel>> {
            match model {
                "exact" => Ok(Box::new(ExactModel::build(&self.index, &scope))),
                "bloom" => Ok(Box::new(BloomModel::build(
                    &self.index,
                    &scope,
                    bits_per_pair,
                ))),
                other => Err(PyValueError::new_err(format!("unknown model '{other}'"))),
            }
        };
        py.detach(|| {
            let r = match strategy {
                "oracle" => engine::query_oracle(&q, &self.index).map_err(value_err)?,
                "exhaustive" => {
                    let m = build_model(Scope::All)?;
                    engine::query_exhaustive(&q, &m, self.index.doc_count()).map_err(value_err)?
                }
                "tiered" => {
                    let tiers =
                        TieredIndex::build(&self.index, need(k, "k")?).map_err(value_err)?;
                    let m = build_model(Scope::Terms(tiers.replaced_set()))?;
                    engine::query_tiered(&q, &tiers, &m, fallback).map_err(value_err)?
                }
                "block" => {
                    let blocks = BlockIndex::build(&self.index, need(beta, "beta")?, hybrid)
                        .map_err(value_err)?;
                    let scope = (0..self.index.term_count() as u32)
                        .filter(|&t| blocks.hybrid_list(t).is_none())
                        .collect();
                    let m = build_model(scope)?;
                    engine::query_block(&q, &blocks, &m).map_err(value_err)?
                }
                other => return Err(PyValueError::new_err(format!("unknown strategy '{other}'"))),
            };
            Ok(r.into())
        })
    }

    /// Storage gain in bits of replacing lists longer than `k` at `s` bits
    /// per model unit.
    fn gain(&self, k: u32, s: f64) -> PyResult<f64> {
        analysis::gain(&self.index, k, s).map_err(value_err)
    }

    /// Upper and lower gain bounds for each k, as dicts.
    fn gain_bounds(&self, ks: Vec<u32>) -> PyResult<Vec<BTreeMap<&'static str, f64>>> {
        let reports = analysis::gain_bounds_sweep(&self.index, &ks).map_err(value_err)?;
        Ok(reports.iter().map(gain_dict).collect())
    }

    /// Returns (pct_with_model, pct_without_model).
    fn guarantees(&self, queries: Vec<String>, k: u32) -> PyResult<(f64, f64)> {
        let parsed = queries
            .iter()
            .map(|q| self.parse(q))
            .collect::<PyResult<Vec<_>>>()?;
        let r = analysis::guarantee_percentages(&parsed, &self.index, k).map_err(value_err)?;
        Ok((r.pct_with_model, r.pct_without_model))
    }

    fn __repr__(&self) -> String {
        format!(
            "Index(docs={}, terms={}, bits={})",
            self.index.doc_count(),
            self.index.term_count(),
            self.index.total_bits()
        )
    }
}

#[pymodule(name = "tbix")]
fn tbix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyIndex>()?;
    m.add_class::<PyQueryResult>()?;
    Ok(())
}
