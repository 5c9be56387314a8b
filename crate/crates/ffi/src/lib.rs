//! C interface. Every fallible function returns an `RclStatus`; on failure
//! the message is available from `rcl_last_error_message` on the same
//! thread. Graphs are opaque handles released with `rcl_graph_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rcl::baselines::{train_paced, train_vanilla, OrderingKind, PacingKind};
use rcl::curriculum::{train_rcl, update_mask};
use rcl::graph::{load_graph, save_graph};
use rcl::perturb::{inject_edges, AttackSpec};
use rcl::synth::{empirical_homophily, generate, EdgeDifficulty, SynthParams};
use rcl::{Error, Graph, GraphError, RclConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidGraph = 4,
    Io = 5,
    Infeasible = 6,
    Shape = 7,
    NonFinite = 8,
    Empty = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RclMethod {
    Rcl = 0,
    Vanilla = 1,
    CurriculumLinear = 2,
    CurriculumRoot = 3,
    RandomLinear = 4,
    RandomRoot = 5,
}

/// Training hyperparameters; start from `rcl_train_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RclTrainConfig {
    pub beta: f64,
    pub gamma: f64,
    pub pace: u32,
    pub epochs: u32,
    pub lr: f64,
    pub hidden: usize,
    pub epsilon_conv: f64,
    pub init_frac: f64,
    pub recon_in_wstep: bool,
    pub smoothing: bool,
    pub loss_decay: f64,
    pub learn_mask: bool,
    pub seed: u64,
}

/// Synthetic graph parameters; start from `rcl_synth_params_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RclSynthParams {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub homo: f64,
    pub avg_degree: f64,
    pub feature_dim: usize,
    pub gaussian_spread: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RclMetrics {
    pub best_val_acc: f64,
    pub test_acc: f64,
    pub best_epoch: u32,
    pub epochs: u32,
}

/// Opaque graph handle.
pub struct RclGraph {
    graph: Graph,
    difficulty: Option<EdgeDifficulty>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RclStatus {
    match err {
        Error::Graph(GraphError::Parse { .. }) => RclStatus::Parse,
        Error::Graph(GraphError::Io { .. }) | Error::Io { .. } => RclStatus::Io,
        Error::Graph(GraphError::Invalid(_)) => RclStatus::InvalidGraph,
        Error::Graph(_) | Error::InvalidParameter(_) => RclStatus::InvalidArgument,
        Error::Infeasible(_) => RclStatus::Infeasible,
        Error::Shape(_) => RclStatus::Shape,
        Error::NonFinite(_) => RclStatus::NonFinite,
        Error::Empty(_) => RclStatus::Empty,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RclStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RclStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RclStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RclStatus::Panic
        }
    }
}

unsafe fn path_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(Error::param(format!("{what} is not UTF-8"))))
}

unsafe fn graph_arg<'a>(g: *const RclGraph) -> Result<&'a RclGraph, Failure> {
    g.as_ref().ok_or(Failure::Null("graph"))
}

fn into_handle(graph: Graph, difficulty: Option<EdgeDifficulty>) -> *mut RclGraph {
    Box::into_raw(Box::new(RclGraph { graph, difficulty }))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rcl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn rcl_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

#[no_mangle]
pub extern "C" fn rcl_train_config_default() -> RclTrainConfig {
    let c = RclConfig::default();
    RclTrainConfig {
        beta: c.beta,
        gamma: c.gamma,
        pace: c.pace,
        epochs: c.epochs,
        lr: c.lr,
        hidden: c.hidden,
        epsilon_conv: c.epsilon_conv,
        init_frac: c.init_frac,
        recon_in_wstep: c.recon_in_wstep,
        smoothing: c.smoothing,
        loss_decay: c.loss_decay,
        learn_mask: c.learn_mask,
        seed: c.seed,
    }
}

#[no_mangle]
pub extern "C" fn rcl_synth_params_default() -> RclSynthParams {
    let p = SynthParams::default();
    RclSynthParams {
        num_nodes: p.num_nodes,
        num_classes: p.num_classes,
        homo: p.homo,
        avg_degree: p.avg_degree,
        feature_dim: p.feature_dim,
        gaussian_spread: p.gaussian_spread,
        seed: p.seed,
    }
}

/// Loads a graph file into `*out`.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_load(path: *const c_char, out: *mut *mut RclGraph) -> RclStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let graph = load_graph(path_arg(path, "path")?)?;
        *out = into_handle(graph, None);
        Ok(())
    })
}

/// Generates a synthetic graph (with edge difficulty labels) into `*out`.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_generate(params: *const RclSynthParams, out: *mut *mut RclGraph) -> RclStatus {
    guard(|| {
        let p = params.as_ref().ok_or(Failure::Null("params"))?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let (graph, difficulty) = generate(&SynthParams {
            num_nodes: p.num_nodes,
            num_classes: p.num_classes,
            homo: p.homo,
            avg_degree: p.avg_degree,
            feature_dim: p.feature_dim,
            gaussian_spread: p.gaussian_spread,
            seed: p.seed,
        })?;
        *out = into_handle(graph, Some(difficulty));
        Ok(())
    })
}

/// Writes the graph in the text graph format.
///
/// # Safety
/// `graph` must come from this library; `path` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_save(graph: *const RclGraph, path: *const c_char) -> RclStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        save_graph(&g.graph, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Releases a graph handle. Null is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_free(graph: *mut RclGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_num_nodes(graph: *const RclGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.num_nodes())
}

/// # Safety
/// `graph` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_num_edges(graph: *const RclGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.num_edges())
}

/// # Safety
/// `graph` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_num_classes(graph: *const RclGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.num_classes())
}

/// # Safety
/// `graph` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_num_features(graph: *const RclGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.num_features())
}

/// Fraction of edges joining same-label nodes.
///
/// # Safety
/// `graph` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcl_graph_homophily(graph: *const RclGraph, out: *mut f64) -> RclStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = empirical_homophily(&g.graph)?;
        Ok(())
    })
}

/// Trains `method` on the graph and reports best-validation metrics.
///
/// # Safety
/// `graph` must come from this library; `config` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcl_train(
    graph: *const RclGraph,
    method: RclMethod,
    config: *const RclTrainConfig,
    out: *mut RclMetrics,
) -> RclStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        let c = config.as_ref().ok_or(Failure::Null("config"))?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let cfg = RclConfig {
            beta: c.beta,
            gamma: c.gamma,
            pace: c.pace,
            epochs: c.epochs,
            lr: c.lr,
            hidden: c.hidden,
            epsilon_conv: c.epsilon_conv,
            init_frac: c.init_frac,
            recon_in_wstep: c.recon_in_wstep,
            smoothing: c.smoothing,
            loss_decay: c.loss_decay,
            learn_mask: c.learn_mask,
            seed: c.seed,
        };
        cfg.validate()?;
        let paced = |o, p| train_paced(&g.graph, &cfg, o, p);
        let m = match method {
            RclMethod::Rcl => train_rcl(&g.graph, &cfg, g.difficulty.as_ref())?.metrics,
            RclMethod::Vanilla => train_vanilla(&g.graph, &cfg)?.1,
            RclMethod::CurriculumLinear => paced(OrderingKind::Residual, PacingKind::Linear)?,
            RclMethod::CurriculumRoot => paced(OrderingKind::Residual, PacingKind::Root)?,
            RclMethod::RandomLinear => paced(OrderingKind::Random, PacingKind::Linear)?,
            RclMethod::RandomRoot => paced(OrderingKind::Random, PacingKind::Root)?,
        };
        *out = RclMetrics {
            best_val_acc: m.best_val_acc,
            test_acc: m.test_acc,
            best_epoch: m.best_epoch,
            epochs: m.epochs,
        };
        Ok(())
    })
}

/// Closed-form mask update over `len` edges, written to `out` (which may
/// alias neither input).
///
/// # Safety
/// `residuals`, `prev` and `out` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rcl_update_mask(
    residuals: *const f64,
    prev: *const f64,
    len: usize,
    lambda: f64,
    beta: f64,
    gamma: f64,
    out: *mut f64,
) -> RclStatus {
    guard(|| {
        if len == 0 {
            return Ok(());
        }
        if residuals.is_null() || prev.is_null() || out.is_null() {
            return Err(Failure::Null("array"));
        }
        let r = std::slice::from_raw_parts(residuals, len);
        let p = std::slice::from_raw_parts(prev, len);
        let s = update_mask(r, p, lambda, beta, gamma)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&s);
        Ok(())
    })
}

/// Attacked copy of `graph` with `round(ratio * E)` random new edges.
///
/// # Safety
/// `graph` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rcl_inject_edges(
    graph: *const RclGraph,
    ratio: f64,
    seed: u64,
    out: *mut *mut RclGraph,
) -> RclStatus {
    guard(|| {
        let g = graph_arg(graph)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let attacked = inject_edges(&g.graph, &AttackSpec { ratio, seed })?;
        let difficulty = match g.difficulty {
            Some(_) => Some(EdgeDifficulty::from_graph(&attacked)?),
            None => None,
        };
        *out = into_handle(attacked, difficulty);
        Ok(())
    })
}
