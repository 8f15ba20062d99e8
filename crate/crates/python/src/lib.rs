use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ncscatter::charfn::charfn_matrix;
use ncscatter::dilation::GradedVectorJson;
use ncscatter::intertwiner::Intertwiner;
use ncscatter::lifting::{self, DEFAULT_A_SCALE};
use ncscatter::numkernel::{ComplexMatrix, TOL_EQ};
use ncscatter::report;
use ncscatter::suite::verify_all;
use ncscatter::transfer::{self, toeplitz_norm};
use ncscatter::words::Word;
use ncscatter::{charfn, ncsystem, scattering};

type Matrix = Vec<Vec<Complex64>>;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &ComplexMatrix) -> Matrix {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect()).collect()
}

fn word(d: usize, letters: Vec<u32>) -> PyResult<Word> {
    Word::new(letters, d as u32).map_err(err)
}

/// A validated coisometric lifting `E` of a row contraction `C`.
#[pyclass(name = "LiftingInstance", frozen)]
struct PyInstance(lifting::LiftingInstance);

#[pymethods]
impl PyInstance {
    #[staticmethod]
    #[pyo3(signature = (d, dim_c, dim_a, seed = 0, a_scale = DEFAULT_A_SCALE))]
    fn generate(d: usize, dim_c: usize, dim_a: usize, seed: u64, a_scale: f64) -> PyResult<Self> {
        lifting::generate(d, dim_c, dim_a, seed, a_scale).map(PyInstance).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (c, a, b, tol = TOL_EQ))]
    fn assemble(c: Vec<Matrix>, a: Vec<Matrix>, b: Vec<Matrix>, tol: f64) -> PyResult<Self> {
        let mats = |v: Vec<Matrix>, cols_if_empty: usize| -> PyResult<Vec<ComplexMatrix>> {
            v.into_iter()
                .map(|m| {
                    let rows = m.len();
                    let cols = m.first().map_or(cols_if_empty, |r| r.len());
                    ComplexMatrix::new(rows, cols, m.into_iter().flatten().collect()).map_err(err)
                })
                .collect()
        };
        let c = mats(c, 0)?;
        let nc = c.first().map_or(0, |m| m.cols());
        let c = ncscatter::rowtuple::OperatorTuple::new(c).map_err(err)?;
        let a = ncscatter::rowtuple::OperatorTuple::new(mats(a, 0)?).map_err(err)?;
        let b = mats(b, nc)?;
        lifting::LiftingInstance::assemble(c, a, b, tol).map(PyInstance).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        lifting::LiftingInstance::from_json(s).map(PyInstance).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d
    }

    #[getter]
    fn dim_c(&self) -> usize {
        self.0.dim_c
    }

    #[getter]
    fn dim_a(&self) -> usize {
        self.0.dim_a
    }

    #[getter]
    fn dim_e(&self) -> usize {
        self.0.dim_e()
    }

    /// Ranks of the defect spaces of `C` and `E`.
    #[getter]
    fn defect_ranks(&self) -> (usize, usize) {
        (self.0.defect_c.rank(), self.0.defect_e.rank())
    }

    #[getter]
    fn gamma(&self) -> Matrix {
        to_rows(&self.0.gamma)
    }

    fn c(&self, j: usize) -> PyResult<Matrix> {
        self.op(&self.0.c, j)
    }

    fn e(&self, j: usize) -> PyResult<Matrix> {
        self.op(&self.0.e, j)
    }

    fn verify(&self, depth: usize) -> PyResult<Report> {
        verify_all(&self.0, depth).map(Report).map_err(err)
    }

    fn verify_coincidence(&self, depth: usize) -> PyResult<Report> {
        charfn::verify_coincidence(&self.0, depth).map(Report).map_err(err)
    }

    fn verify_scattering(&self, depth: usize) -> PyResult<Report> {
        scattering::verify_scattering(&self.0, depth).map(Report).map_err(err)
    }

    fn transfer(&self, depth: usize) -> NCSeries {
        NCSeries(transfer::transfer_series(&self.0, depth))
    }

    #[pyo3(signature = (depth, tol = charfn::TOL_WELL_DEFINED))]
    fn charfn(&self, depth: usize, tol: f64) -> PyResult<NCSeries> {
        charfn_matrix(&self.0, depth, tol).map(NCSeries).map_err(err)
    }

    /// Operator norm of the depth-`N` Toeplitz compression of the transfer function.
    fn toeplitz_norm(&self, depth: usize) -> f64 {
        toeplitz_norm(&self.0, depth)
    }

    /// Dense `Ŵ` on `H_E ⊕ Γ_{≤N}⊗𝒟_E`.
    fn w_matrix(&self, depth: usize) -> PyResult<Matrix> {
        Intertwiner::new(&self.0).compute_w(depth).map(|w| to_rows(&w.matrix)).map_err(err)
    }

    /// Runs the system on a Fock-only input given as graded-vector JSON; returns trajectory JSON.
    fn simulate(&self, input_json: &str, depth: usize) -> PyResult<String> {
        let u: GradedVectorJson = serde_json::from_str(input_json).map_err(err)?;
        let u = u.into_vector(self.0.d, self.0.defect_e.rank()).map_err(err)?;
        let t = ncsystem::simulate(&self.0, &u, depth).map_err(err)?;
        serde_json::to_string(&t).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("LiftingInstance(d={}, dim_c={}, dim_a={})", self.0.d, self.0.dim_c, self.0.dim_a)
    }
}

impl PyInstance {
    fn op(&self, t: &ncscatter::rowtuple::OperatorTuple, j: usize) -> PyResult<Matrix> {
        if j == 0 || j > t.d() {
            return Err(err(format!("letter {j} outside 1..={}", t.d())));
        }
        Ok(to_rows(t.op(j)))
    }
}

/// Truncated noncommutative power series with matrix coefficients.
#[pyclass(name = "NCSeries", frozen)]
struct NCSeries(transfer::NCSeries);

#[pymethods]
impl NCSeries {
    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.out_dim(), self.0.in_dim())
    }

    fn words(&self) -> Vec<Vec<u32>> {
        self.0.words().iter().map(|w| w.letters().to_vec()).collect()
    }

    fn coeff(&self, letters: Vec<u32>) -> PyResult<Matrix> {
        let w = word(self.0.d(), letters)?;
        self.0.coeff(&w).map(to_rows).ok_or_else(|| err(format!("{w} is deeper than {}", self.0.depth())))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.coeffs().len()
    }
}

/// Pass/fail lines with their measured violations.
#[pyclass(name = "Report", frozen)]
struct Report(report::Report);

#[pymethods]
impl Report {
    #[getter]
    fn all_pass(&self) -> bool {
        self.0.all_pass()
    }

    #[getter]
    fn max_violation(&self) -> f64 {
        self.0.max_violation()
    }

    fn checks<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.0
            .checks
            .iter()
            .map(|c| {
                let d = PyDict::new(py);
                d.set_item("check", &c.check)?;
                d.set_item("max_violation", c.max_violation)?;
                d.set_item("threshold", c.threshold)?;
                d.set_item("pass", c.pass)?;
                Ok(d)
            })
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.0).map_err(err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __len__(&self) -> usize {
        self.0.checks.len()
    }
}

#[pymodule]
#[pyo3(name = "ncscatter")]
fn ncscatter_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<NCSeries>()?;
    m.add_class::<Report>()?;
    Ok(())
}
