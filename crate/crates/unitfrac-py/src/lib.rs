//! Python bindings: rationals travel as "a/b" strings, reports as dicts
//! decoded from the same JSON the CLI emits.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use unitfrac::cleanup::lemma2_sum;
use unitfrac::dickman::RhoEvaluator;
use unitfrac::pipeline::{
    self, min_ratio_bruteforce, tightness_check, PipelineConfig,
};
use unitfrac::rational::{
    find_m, format_rational, harmonic_sum_range, parse_rational, rational_to_f64,
};
use unitfrac::smooth::{
    count_representations, enumerate_smooth, lemma4_check, solve_reciprocal_subset, SearchConfig,
};
use unitfrac::FactorSieve;

fn err(e: unitfrac::Error) -> PyErr {
    PyValueError::new_err(format!("[{}] {e}", e.reason_code()))
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyObject {
    match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_py(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py(py)
            } else if let Some(u) = n.as_u64() {
                u.into_py(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py(py)
            }
        }
        serde_json::Value::String(s) => s.into_py(py),
        serde_json::Value::Array(a) => {
            let items: Vec<PyObject> = a.iter().map(|x| json_to_py(py, x)).collect();
            items.into_py(py)
        }
        serde_json::Value::Object(o) => {
            let d = PyDict::new_bound(py);
            for (k, val) in o {
                let _ = d.set_item(k, json_to_py(py, val));
            }
            d.into_py(py)
        }
    }
}

fn report<T: serde::Serialize>(py: Python<'_>, t: &T) -> PyObject {
    json_to_py(py, &serde_json::to_value(t).unwrap())
}

/// Prime-power factor sieve shared by the bound methods.
#[pyclass(name = "FactorSieve")]
struct PyFactorSieve {
    inner: FactorSieve,
}

#[pymethods]
impl PyFactorSieve {
    #[new]
    fn new(limit: u64) -> Self {
        Self {
            inner: FactorSieve::new(limit.max(2)),
        }
    }

    fn factorize(&self, n: u64) -> PyResult<Vec<(u64, u32)>> {
        Ok(self
            .inner
            .factorize(n)
            .map_err(err)?
            .into_iter()
            .map(|pp| (pp.p, pp.a))
            .collect())
    }

    fn is_smooth(&self, n: u64, y: u64) -> PyResult<bool> {
        self.inner.is_smooth(n, y).map_err(err)
    }

    fn psi_prime(&self, x: u64, y: u64) -> PyResult<u64> {
        self.inner.psi_prime(x, y).map_err(err)
    }

    fn smooth_members(&self, m: u64, hi: u64, y: u64) -> PyResult<Vec<u64>> {
        Ok(enumerate_smooth(&self.inner, m, hi, y).map_err(err)?.members)
    }

    #[pyo3(signature = (r, n, epsilon=None, max_ratio=None))]
    fn decompose(
        &self,
        py: Python<'_>,
        r: &str,
        n: u64,
        epsilon: Option<f64>,
        max_ratio: Option<f64>,
    ) -> PyResult<PyObject> {
        let r = parse_rational(r).map_err(err)?;
        let mut cfg = PipelineConfig::default();
        if let Some(e) = epsilon {
            cfg.epsilon = e;
        }
        if let Some(m) = max_ratio {
            cfg.max_ratio = m;
        }
        let d = pipeline::decompose(&self.inner, &r, n, &cfg).map_err(err)?;
        Ok(report(py, &d))
    }

    fn tightness(&self, py: Python<'_>, terms: Vec<u64>, slack: f64) -> PyResult<PyObject> {
        let mut terms = terms;
        terms.sort_unstable();
        let t = tightness_check(&self.inner, &terms, slack).map_err(err)?;
        Ok(report(py, &t))
    }

    #[pyo3(signature = (n, c, threshold))]
    fn lemma2(&self, n: u64, c: f64, threshold: u64) -> PyResult<(f64, f64)> {
        let (exact, main) = lemma2_sum(&self.inner, n, c, threshold).map_err(err)?;
        Ok((rational_to_f64(&exact), main))
    }

    #[pyo3(signature = (m, h, epsilon=0.1, kappa=0.25))]
    fn lemma4(
        &self,
        py: Python<'_>,
        m: u64,
        h: f64,
        epsilon: f64,
        kappa: f64,
    ) -> PyResult<PyObject> {
        let rep = lemma4_check(&self.inner, m, h, epsilon, kappa).map_err(err)?;
        Ok(report(py, &rep))
    }

    #[pyo3(signature = (m, hi, y, target))]
    fn count_representations(&self, py: Python<'_>, m: u64, hi: u64, y: u64, target: &str) -> PyResult<PyObject> {
        let si = enumerate_smooth(&self.inner, m, hi, y).map_err(err)?;
        let ab = parse_rational(target).map_err(err)?;
        let rep = count_representations(&si, &ab, None).map_err(err)?;
        Ok(report(py, &rep))
    }

    #[pyo3(signature = (m, hi, y, target))]
    fn solve_subset(&self, m: u64, hi: u64, y: u64, target: &str) -> PyResult<Vec<u64>> {
        let si = enumerate_smooth(&self.inner, m, hi, y).map_err(err)?;
        let ab = parse_rational(target).map_err(err)?;
        solve_reciprocal_subset(&si, &ab, &SearchConfig::default()).map_err(err)
    }
}

#[pyfunction]
fn harmonic_sum(lo: u64, hi: u64) -> PyResult<String> {
    if lo < 1 || hi < lo {
        return Err(PyValueError::new_err("need 1 <= lo <= hi"));
    }
    Ok(format_rational(&harmonic_sum_range(lo, hi)))
}

#[pyfunction(name = "find_m")]
fn find_m_py(r: &str, n: u64) -> PyResult<u64> {
    let r = parse_rational(r).map_err(err)?;
    find_m(&r, n).map_err(err)
}

#[pyfunction]
fn verify(py: Python<'_>, r: &str, n: u64, terms: Vec<u64>) -> PyResult<PyObject> {
    let r = parse_rational(r).map_err(err)?;
    let mut terms = terms;
    terms.sort_unstable();
    Ok(report(py, &pipeline::verify(&r, n, &terms, None)))
}

#[pyfunction]
fn rho(u: f64) -> f64 {
    RhoEvaluator::new().rho(u)
}

#[pyfunction]
fn min_ratio(py: Python<'_>, r: &str, n: u64, x_max: u64) -> PyResult<PyObject> {
    let r = parse_rational(r).map_err(err)?;
    let res = min_ratio_bruteforce(&r, n, x_max).map_err(err)?;
    Ok(report(py, &res))
}

#[pymodule]
fn unitfrac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFactorSieve>()?;
    m.add_function(wrap_pyfunction!(harmonic_sum, m)?)?;
    m.add_function(wrap_pyfunction!(find_m_py, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(min_ratio, m)?)?;
    Ok(())
}
