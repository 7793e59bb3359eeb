//! C ABI for the cube world, the simulated Raft environment, the Mann-Whitney
//! test and whole experiments.
//!
//! Every entry point returns a [`DxStatus`]. On failure the message is kept
//! per thread and can be read with [`dx_last_error`]. Strings handed out through
//! `out` parameters are owned by the caller and must be released with
//! [`dx_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use distexplore::cube::CubeEnv;
use distexplore::harness::{
    mann_whitney_u, run_comparison, summary_csv, EnvironmentSpec, ExperimentConfig,
};
use distexplore::mdp::{ActionKey, Environment, StateKey};
use distexplore::raft::RaftEnv;
use distexplore::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DxStatus {
    Ok = 0,
    NullPointer = 1,
    /// Not UTF-8, or an index out of range.
    InvalidArgument = 2,
    Config = 3,
    Predicate = 4,
    DisabledAction = 5,
    /// Any other failure inside the library, including panics.
    Runtime = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(DxStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config(_) | Error::InvalidRun(_) => DxStatus::Config,
            Error::Predicate(_) => DxStatus::Predicate,
            Error::DisabledAction { .. } => DxStatus::DisabledAction,
            _ => DxStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: DxStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DxStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside distexplore");
            DxStatus::Runtime
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(DxStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(DxStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return fail(DxStatus::NullPointer, format!("{what} is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: &str) -> Result<(), Failure> {
    let c = CString::new(s).or_else(|_| fail(DxStatus::Runtime, "string contains NUL"))?;
    put(out, c.into_raw(), "out")
}

/// Last error message on this thread, or null. Valid until the next failing
/// call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn dx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn dx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

enum World {
    Cube(CubeEnv),
    Raft(Box<RaftEnv>),
}

/// Opaque environment handle.
pub struct DxEnv {
    world: World,
    key: StateKey,
    actions: Vec<ActionKey>,
}

impl DxEnv {
    fn refresh(&mut self, key: StateKey) {
        self.actions = match &self.world {
            World::Cube(e) => e.actions(),
            World::Raft(e) => e.actions(),
        };
        self.key = key;
    }
}

/// Builds an environment from a TOML table such as `kind = "cube"` or
/// `kind = "raft"` plus its parameters, and resets it.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dx_env_new(toml: *const c_char, out: *mut *mut DxEnv) -> DxStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let spec: EnvironmentSpec = toml::from_str(text)
            .or_else(|e| fail(DxStatus::Config, format!("environment: {e}")))?;
        let mut world = match spec {
            EnvironmentSpec::Cube(c) => World::Cube(CubeEnv::new(c)?),
            EnvironmentSpec::Raft(p) => World::Raft(Box::new(RaftEnv::new(p)?)),
        };
        let key = match &mut world {
            World::Cube(e) => e.reset(),
            World::Raft(e) => e.reset(),
        };
        let mut env = DxEnv {
            world,
            key: key.clone(),
            actions: Vec::new(),
        };
        env.refresh(key);
        put(out, Box::into_raw(Box::new(env)), "out")
    })
}

/// # Safety
/// `env` must come from [`dx_env_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dx_env_free(env: *mut DxEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

unsafe fn env_ref<'a>(env: *mut DxEnv) -> Result<&'a mut DxEnv, Failure> {
    env.as_mut()
        .map_or_else(|| fail(DxStatus::NullPointer, "env is null"), Ok)
}

/// Returns to the initial state and writes its key.
///
/// # Safety
/// `env` must be a live handle; `out_key` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dx_env_reset(env: *mut DxEnv, out_key: *mut *mut c_char) -> DxStatus {
    guard(|| {
        let env = env_ref(env)?;
        let key = match &mut env.world {
            World::Cube(e) => e.reset(),
            World::Raft(e) => e.reset(),
        };
        env.refresh(key);
        put_string(out_key, env.key.as_str())
    })
}

/// Current state key.
///
/// # Safety
/// `env` must be a live handle; `out_key` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dx_env_state_key(env: *mut DxEnv, out_key: *mut *mut c_char) -> DxStatus {
    guard(|| {
        let env = env_ref(env)?;
        put_string(out_key, env.key.as_str())
    })
}

/// Number of actions enabled in the current state.
///
/// # Safety
/// `env` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dx_env_action_count(env: *mut DxEnv, out: *mut usize) -> DxStatus {
    guard(|| {
        let env = env_ref(env)?;
        put(out, env.actions.len(), "out")
    })
}

/// Key of enabled action `index`, in the order the environment lists them.
///
/// # Safety
/// `env` must be a live handle; `out_key` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dx_env_action_key(
    env: *mut DxEnv,
    index: usize,
    out_key: *mut *mut c_char,
) -> DxStatus {
    guard(|| {
        let env = env_ref(env)?;
        let Some(a) = env.actions.get(index) else {
            return fail(
                DxStatus::InvalidArgument,
                format!("action index {index} out of range ({})", env.actions.len()),
            );
        };
        put_string(out_key, a.as_str())
    })
}

/// Takes `action` and writes the key of the next state.
///
/// # Safety
/// `env` must be a live handle; `action` a NUL-terminated string; `out_key`
/// writable or null when the key is not wanted.
#[no_mangle]
pub unsafe extern "C" fn dx_env_step(
    env: *mut DxEnv,
    action: *const c_char,
    out_key: *mut *mut c_char,
) -> DxStatus {
    guard(|| {
        let env = env_ref(env)?;
        let action = ActionKey::new(str_arg(action, "action")?);
        let t = match &mut env.world {
            World::Cube(e) => e.step(&action)?,
            World::Raft(e) => e.step(&action)?,
        };
        env.refresh(t.state);
        if out_key.is_null() {
            Ok(())
        } else {
            put_string(out_key, env.key.as_str())
        }
    })
}

/// Two-sided Mann-Whitney U test of `a[0..n]` against `b[0..m]`.
///
/// # Safety
/// `a` and `b` must point to `n` and `m` readable doubles; `out_u` and `out_p`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn dx_mann_whitney_u(
    a: *const f64,
    n: usize,
    b: *const f64,
    m: usize,
    out_u: *mut f64,
    out_p: *mut f64,
) -> DxStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return fail(DxStatus::NullPointer, "sample pointer is null");
        }
        let (a, b) = (
            std::slice::from_raw_parts(a, n),
            std::slice::from_raw_parts(b, m),
        );
        let mw =
            mann_whitney_u(a, b).map_err(|e| Failure(DxStatus::InvalidArgument, e.to_string()))?;
        put(out_u, mw.u, "out_u")?;
        put(out_p, mw.p, "out_p")
    })
}

/// Runs a full experiment configuration and writes its summary CSV. Nothing is
/// written to disk.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out_csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dx_run_experiment(
    config_toml: *const c_char,
    out_csv: *mut *mut c_char,
) -> DxStatus {
    guard(|| {
        let config = ExperimentConfig::from_toml(str_arg(config_toml, "config_toml")?)?;
        let report = run_comparison(&config)?;
        put_string(out_csv, &summary_csv(&report))
    })
}
