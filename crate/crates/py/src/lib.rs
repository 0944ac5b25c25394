use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use atrahasis::code::{
    derive_params, fixture_956, rs_stars_t2, verify_axioms, AxiomReport, CodeError, CodeParams, Flavor, RegeneratingCode,
};
use atrahasis::field::{FieldSpec, Symbol};
use atrahasis::format::{CodeSpec, FormatError};
use atrahasis::search::nullstellensatz_witness;
use atrahasis::transforms::{plan_central_repair, ShortenedCode, Strategy};

fn code_err(e: CodeError) -> PyErr {
    match e {
        CodeError::NodeIndex { .. } => PyIndexError::new_err(e.to_string()),
        CodeError::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn format_err(e: FormatError) -> PyErr {
    match e {
        FormatError::Code(c) => code_err(c),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn params_dict(p: &CodeParams) -> BTreeMap<&'static str, usize> {
    BTreeMap::from([("n", p.n), ("k", p.k), ("d", p.d), ("t", p.t), ("alpha", p.alpha), ("beta", p.beta), ("file_size", p.file_size)])
}

fn parse_flavor(s: &str) -> PyResult<Flavor> {
    s.parse().map_err(code_err)
}

/// An MSR code, possibly shortened. Node indices are 0-based.
#[pyclass(module = "atrahasis_py", frozen)]
struct Code {
    spec: CodeSpec,
    code: ShortenedCode,
}

impl Code {
    fn from_spec(spec: CodeSpec) -> PyResult<Self> {
        let code = spec.shortened().map_err(code_err)?;
        Ok(Code { spec, code })
    }

    fn check_symbols(&self, v: &[Symbol]) -> PyResult<()> {
        let f = self.code.field();
        match v.iter().find(|&&s| !f.contains(s)) {
            Some(bad) => Err(PyValueError::new_err(format!("{bad} is not an element of {f}"))),
            None => Ok(()),
        }
    }
}

#[pymethods]
impl Code {
    /// The (9,5,6,6) symmetric code over GF(16).
    #[staticmethod]
    fn fixture() -> PyResult<Self> {
        Self::from_spec(CodeSpec::new(fixture_956()))
    }

    #[staticmethod]
    fn from_spec_file(path: PathBuf) -> PyResult<Self> {
        let loaded = CodeSpec::read(&path).map_err(format_err)?;
        if !loaded.hash_matches {
            return Err(PyValueError::new_err(format!("{}: content hash does not match", path.display())));
        }
        Self::from_spec(loaded.spec)
    }

    /// `t = 2` code with `d = 2(k-1)` over the named field.
    #[staticmethod]
    #[pyo3(signature = (field, n, k, flavor = "symmetric"))]
    fn rs_t2(field: &str, n: usize, k: usize, flavor: &str) -> PyResult<Self> {
        let field = FieldSpec::parse(field).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let stars = rs_stars_t2(&field, n, k, parse_flavor(flavor)?).map_err(code_err)?;
        Self::from_spec(CodeSpec::new(stars))
    }

    /// A new code with `delta` more nodes pinned to zero.
    fn shorten(&self, delta: usize) -> PyResult<Self> {
        let next = self.code.shorten(delta).map_err(code_err)?;
        Ok(Code { spec: CodeSpec { stars: self.spec.stars.clone(), pinned: next.pinned().to_vec() }, code: next })
    }

    #[getter]
    fn params(&self) -> BTreeMap<&'static str, usize> {
        let c = &self.code;
        BTreeMap::from([("n", c.n()), ("k", c.k()), ("d", c.d()), ("alpha", c.alpha()), ("beta", c.beta()), ("file_size", c.file_size())])
    }

    #[getter]
    fn field(&self) -> String {
        self.code.field().to_string()
    }

    #[getter]
    fn field_order(&self) -> u32 {
        self.code.field().order()
    }

    #[getter]
    fn params_hash(&self) -> u64 {
        self.spec.params_hash()
    }

    fn to_toml(&self) -> String {
        self.spec.to_toml()
    }

    /// Node contents for `file_size` user symbols.
    fn encode(&self, raw: Vec<Symbol>) -> PyResult<Vec<Vec<Symbol>>> {
        self.check_symbols(&raw)?;
        self.code.encode_nodes(&raw).map_err(code_err)
    }

    /// Recovers the user symbols from `{node: content}` for at least `k` nodes.
    fn download(&self, nodes: BTreeMap<usize, Vec<Symbol>>) -> PyResult<Vec<Symbol>> {
        let idx: Vec<usize> = nodes.keys().copied().collect();
        let plan = self.code.download_plan(&idx).map_err(code_err)?;
        let contents: Vec<&[Symbol]> = plan.nodes.iter().map(|h| nodes[h].as_slice()).collect();
        for c in &contents {
            if c.len() != self.code.alpha() {
                return Err(PyValueError::new_err(format!("node content has length {}, expected {}", c.len(), self.code.alpha())));
            }
            self.check_symbols(c)?;
        }
        Ok(plan.apply(&contents))
    }

    /// The `beta` symbols node `helper` sends towards `failed`.
    fn help(&self, helper: usize, content: Vec<Symbol>, failed: usize) -> PyResult<Vec<Symbol>> {
        if content.len() != self.code.alpha() {
            return Err(PyValueError::new_err(format!("content has length {}, expected {}", content.len(), self.code.alpha())));
        }
        self.check_symbols(&content)?;
        let base = self.code.base();
        let m = base
            .help_matrix(self.code.base_index(helper).map_err(code_err)?, self.code.base_index(failed).map_err(code_err)?)
            .map_err(code_err)?;
        m.mul_vec(&content).map_err(|e| code_err(e.into()))
    }

    /// Rebuilds `failed` from `{helper: message}` for exactly `d` helpers.
    fn repair(&self, failed: usize, messages: BTreeMap<usize, Vec<Symbol>>) -> PyResult<Vec<Symbol>> {
        let helpers: Vec<usize> = messages.keys().copied().collect();
        let plan = self.code.repair_plan(failed, &helpers).map_err(code_err)?;
        let views: Vec<&[Symbol]> = helpers.iter().map(|h| messages[h].as_slice()).collect();
        for v in &views {
            if v.len() != self.code.beta() {
                return Err(PyValueError::new_err(format!("message has length {}, expected {}", v.len(), self.code.beta())));
            }
        }
        Ok(plan.rebuild(&views))
    }

    /// Rebuilds two failed nodes from `{helper: content}` of `d` helpers.
    /// Returns `(content_f, content_g, symbols_sent)`.
    #[pyo3(signature = (f, g, contents, strategy = "subspace"))]
    fn repair_two(&self, f: usize, g: usize, contents: BTreeMap<usize, Vec<Symbol>>, strategy: &str) -> PyResult<(Vec<Symbol>, Vec<Symbol>, usize)> {
        if self.code.depth() > 0 {
            return Err(PyValueError::new_err("two-node repair needs an unshortened code"));
        }
        let strategy: Strategy = strategy.parse().map_err(code_err)?;
        let helpers: Vec<usize> = contents.keys().copied().collect();
        let plan = plan_central_repair(self.code.base(), f, g, &helpers, strategy).map_err(code_err)?;
        let views: Vec<&[Symbol]> = helpers.iter().map(|h| contents[h].as_slice()).collect();
        let (vf, vg) = plan.rebuild(&plan.messages(&views));
        Ok((vf, vg, plan.bandwidth()))
    }

    /// `None` if every axiom holds, otherwise `(axiom, nodes)`.
    fn verify(&self) -> Option<(String, Vec<usize>)> {
        match verify_axioms(&self.spec.stars) {
            AxiomReport::Pass => None,
            AxiomReport::Violation(v) => Some((v.axiom.to_string(), v.set)),
        }
    }

    fn __repr__(&self) -> String {
        let c = &self.code;
        format!("Code(n={}, k={}, d={}, alpha={}, beta={}, field={})", c.n(), c.k(), c.d(), c.alpha(), c.beta(), c.field())
    }
}

#[pyfunction]
#[pyo3(signature = (n, k, d, flavor = "symmetric"))]
fn derive(n: usize, k: usize, d: usize, flavor: &str) -> PyResult<BTreeMap<&'static str, usize>> {
    Ok(params_dict(&derive_params(n, k, d, parse_flavor(flavor)?).map_err(code_err)?))
}

/// Evaluates the determinant condition at random points; returns
/// `(verdict, redraws)`.
#[pyfunction]
#[pyo3(signature = (k, d, field = "gf127", seed = 0, max_redraws = 10, flavor = "symmetric"))]
fn witness(k: usize, d: usize, field: &str, seed: u64, max_redraws: usize, flavor: &str) -> PyResult<(String, usize)> {
    let p = derive_params(d + 1, k, d, parse_flavor(flavor)?).map_err(code_err)?;
    let field = FieldSpec::parse(field).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = nullstellensatz_witness(&p, &field, seed, max_redraws);
    Ok((r.verdict.to_string(), r.redraws))
}

#[pymodule]
fn atrahasis_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Code>()?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    Ok(())
}
