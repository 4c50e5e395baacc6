//! Python bindings for `hybridssl`.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

use hybridssl::data::{self, SplitSpec, SyntheticSpec};
use hybridssl::model::{
    self, CouplingConfig, CouplingFamily, Dataset, HybridModel, Instance, SparseBinaryVector,
};
use hybridssl::trainer::{self, TrainConfig, TrainReport};
use hybridssl::{expfam, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Numeric(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Documents with binary features and optional labels.
#[pyclass(name = "Dataset", module = "hybridssl", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from `(label or None, [feature ids])` pairs.
    #[new]
    fn new(
        rows: Vec<(Option<usize>, Vec<u32>)>,
        num_classes: usize,
        num_features: usize,
    ) -> PyResult<Self> {
        let instances = rows
            .into_iter()
            .map(|(label, ids)| {
                let x = SparseBinaryVector::from_unsorted(ids, num_features)?;
                Ok(Instance { features: x, label })
            })
            .collect::<Result<Vec<_>, Error>>()
            .map_err(py_err)?;
        Ok(PyDataset {
            inner: Dataset::new(instances, num_classes, num_features).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, num_features=None))]
    fn load(path: PathBuf, num_features: Option<usize>) -> PyResult<Self> {
        Ok(PyDataset {
            inner: data::load_corpus(&path, num_features).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (num_classes, num_features, docs_per_class, separation, seed=0))]
    fn synthetic(
        num_classes: usize,
        num_features: usize,
        docs_per_class: usize,
        separation: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let spec = SyntheticSpec {
            num_classes,
            num_features,
            docs_per_class,
            separation,
            seed,
        };
        Ok(PyDataset {
            inner: data::generate_synthetic(&spec).map_err(py_err)?.data,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        data::write_corpus(&path, &self.inner).map_err(py_err)
    }

    /// `(train, test)`: labeled and unlabeled training instances drawn per
    /// class, the remaining labeled instances as test.
    #[pyo3(signature = (labeled_per_class, unlabeled=0, seed=0))]
    fn split(
        &self,
        labeled_per_class: usize,
        unlabeled: usize,
        seed: u64,
    ) -> PyResult<(PyDataset, PyDataset)> {
        let s = data::sample_split(
            &self.inner,
            &SplitSpec {
                labeled_per_class,
                unlabeled_total: unlabeled,
                seed,
            },
        )
        .map_err(py_err)?;
        Ok((PyDataset { inner: s.train }, PyDataset { inner: s.test }))
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    #[getter]
    fn num_features(&self) -> usize {
        self.inner.num_features()
    }

    #[getter]
    fn num_labeled(&self) -> usize {
        self.inner.num_labeled()
    }

    #[getter]
    fn labels(&self) -> Vec<Option<usize>> {
        self.inner.instances().iter().map(|i| i.label).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(len={}, labeled={}, K={}, M={})",
            self.inner.len(),
            self.inner.num_labeled(),
            self.inner.num_classes(),
            self.inner.num_features()
        )
    }
}

/// Trained generative and discriminative parameters.
#[pyclass(name = "Model", module = "hybridssl", frozen)]
pub struct PyModel {
    inner: HybridModel,
    report: Option<TrainReport>,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyModel {
            inner: HybridModel::load(&path).map_err(py_err)?,
            report: None,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(py_err)
    }

    /// Class predicted by the logistic-regression part for each instance.
    fn predict(&self, data: &PyDataset) -> Vec<usize> {
        data.inner
            .instances()
            .iter()
            .map(|i| model::predict(&self.inner.disc, &i.features))
            .collect()
    }

    /// Class posterior of the logistic-regression part for each instance.
    fn predict_proba(&self, data: &PyDataset) -> Vec<Vec<f64>> {
        data.inner
            .instances()
            .iter()
            .map(|i| model::lr_posterior(&self.inner.disc, &i.features))
            .collect()
    }

    /// Class posterior of the naive Bayes part for each instance.
    fn generative_proba(&self, data: &PyDataset) -> Vec<Vec<f64>> {
        data.inner
            .instances()
            .iter()
            .map(|i| model::nb_posterior(&self.inner.gen, &i.features))
            .collect()
    }

    fn accuracy(&self, data: &PyDataset) -> PyResult<f64> {
        model::accuracy(&data.inner, |x| self.inner.disc.predict(x)).map_err(py_err)
    }

    #[getter]
    fn pi(&self) -> Vec<f64> {
        self.inner.gen.pi().to_vec()
    }

    /// Row-major K × M generative natural parameters.
    #[getter]
    fn theta_tilde(&self) -> Vec<f64> {
        self.inner.gen.theta_tilde().to_vec()
    }

    /// Row-major K × M logistic weights.
    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.disc.w().to_vec()
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.inner.disc.b().to_vec()
    }

    /// Objective after each outer iteration; empty for a loaded model.
    #[getter]
    fn trace(&self) -> Vec<f64> {
        self.report
            .as_ref()
            .map(|r| r.log_joint_trace.clone())
            .unwrap_or_default()
    }

    #[getter]
    fn converged(&self) -> Option<bool> {
        self.report.as_ref().map(|r| r.converged)
    }

    #[getter]
    fn mode(&self) -> Option<&'static str> {
        self.report.as_ref().map(|r| r.endpoint_mode.name())
    }
}

fn coupling(
    kind: &str,
    lambda: Option<f64>,
    gamma: Option<f64>,
    disc_sigma2: f64,
) -> Result<CouplingConfig, Error> {
    let family = match kind {
        "beta" => CouplingFamily::Beta,
        "gauss" => CouplingFamily::Gaussian,
        "none" => CouplingFamily::Decoupled,
        other => {
            return Err(Error::Config(format!(
                "coupling must be beta, gauss or none, got {other:?}"
            )))
        }
    };
    match (lambda, gamma, family) {
        (Some(_), Some(_), _) => Err(Error::Config("give lambda or gamma, not both".into())),
        (Some(l), None, _) => CouplingConfig::from_lambda(family, l, disc_sigma2),
        (None, Some(g), CouplingFamily::Beta) => CouplingConfig::beta(g, disc_sigma2),
        (None, Some(g), CouplingFamily::Gaussian) => CouplingConfig::gaussian(1.0 / g, disc_sigma2),
        (None, Some(_), CouplingFamily::Decoupled) => Err(Error::Config(
            "gamma has no meaning without coupling".into(),
        )),
        (None, None, CouplingFamily::Decoupled) => CouplingConfig::decoupled(disc_sigma2),
        (None, None, _) => Err(Error::Config("give lambda or gamma".into())),
    }
}

/// Trains the hybrid model. `lambda` in [0, 1] interpolates from naive Bayes
/// (0) to logistic regression (1); `gamma` sets the coupling directly.
#[pyfunction]
#[pyo3(signature = (data, lambda_=None, gamma=None, coupling_kind="beta", disc_sigma2=100.0, seed=0, max_iters=200, tol=1e-6))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    data: &PyDataset,
    lambda_: Option<f64>,
    gamma: Option<f64>,
    coupling_kind: &str,
    disc_sigma2: f64,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> PyResult<PyModel> {
    let c = coupling(coupling_kind, lambda_, gamma, disc_sigma2).map_err(py_err)?;
    let cfg = TrainConfig {
        seed,
        max_outer_iters: max_iters,
        tol,
        ..Default::default()
    };
    let dataset = data.inner.clone();
    let t = py
        .detach(move || trainer::train(&dataset, &c, &cfg))
        .map_err(py_err)?;
    Ok(PyModel {
        inner: HybridModel::new(t.gen, t.disc).map_err(py_err)?,
        report: Some(t.report),
    })
}

#[pyfunction]
fn lambda_to_gamma(lambda_: f64) -> PyResult<f64> {
    trainer::lambda_to_gamma(lambda_).map_err(py_err)
}

/// Variance of θ̃ under the Beta coupling prior centred on `theta`.
#[pyfunction]
fn beta_prior_variance(theta: f64, gamma: f64) -> PyResult<f64> {
    expfam::beta_prior_variance(theta, gamma).map_err(py_err)
}

#[pyfunction]
fn log_partition(theta: f64) -> f64 {
    expfam::log_partition(theta)
}

#[pymodule]
#[pyo3(name = "hybridssl")]
fn hybridssl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_to_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(beta_prior_variance, m)?)?;
    m.add_function(wrap_pyfunction!(log_partition, m)?)?;
    Ok(())
}
