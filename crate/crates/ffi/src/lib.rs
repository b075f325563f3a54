//! C ABI for the telekinesis engine.
//!
//! Conventions:
//! - Every fallible call returns a [`TkStatus`]; on failure the message is
//!   available from [`tk_last_error_message`] on the same thread.
//! - Strings crossing the boundary are NUL-terminated UTF-8. Strings returned
//!   through out-pointers are owned by the caller and released with
//!   [`tk_string_free`].
//! - An engine is an opaque [`TkEngine`] handle from [`tk_engine_new`],
//!   released with [`tk_engine_free`]. A handle must not be used from two
//!   threads at once.
//! - Panics never cross the boundary; they surface as `TK_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use telekinesis::analysis::{art_anova, f_upper_tail, ObservationTable};
use telekinesis::biosignal::Calibration;
use telekinesis::engine::Engine;
use telekinesis::manipulation::{self, ManipulationParams, ManipulationState};
use telekinesis::model::canonical::to_canonical_json;
use telekinesis::model::{EngineConfig, FactorCondition, SensorFrame, Vec3};
use telekinesis::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Calibration = 5,
    OutOfOrder = 6,
    Unbalanced = 7,
    UndefinedF = 8,
    EmptyTable = 9,
    Io = 10,
    Panic = 11,
}

impl From<&Error> for TkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Json(_) => TkStatus::Parse,
            Error::Validation(_) => TkStatus::Validation,
            Error::Calibration(_) => TkStatus::Calibration,
            Error::OutOfOrder { .. } => TkStatus::OutOfOrder,
            Error::Unbalanced(_) => TkStatus::Unbalanced,
            Error::UndefinedF => TkStatus::UndefinedF,
            Error::EmptyTable => TkStatus::EmptyTable,
            Error::Io { .. } => TkStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<TkVec3> for Vec3 {
    fn from(v: TkVec3) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

impl From<Vec3> for TkVec3 {
    fn from(v: Vec3) -> Self {
        TkVec3 { x: v.x, y: v.y, z: v.z }
    }
}

/// Per-object follow state. `prev_dir` is a unit vector or all zeros.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkManipulationState {
    pub prev_hand: TkVec3,
    pub prev_m: f64,
    pub prev_dir: TkVec3,
    pub object_pos: TkVec3,
}

impl From<TkManipulationState> for ManipulationState {
    fn from(s: TkManipulationState) -> Self {
        ManipulationState {
            prev_hand: s.prev_hand.into(),
            prev_m: s.prev_m,
            prev_dir: s.prev_dir.into(),
            object_pos: s.object_pos.into(),
        }
    }
}

impl From<ManipulationState> for TkManipulationState {
    fn from(s: ManipulationState) -> Self {
        TkManipulationState {
            prev_hand: s.prev_hand.into(),
            prev_m: s.prev_m,
            prev_dir: s.prev_dir.into(),
            object_pos: s.object_pos.into(),
        }
    }
}

/// Sensitivity, direction-similarity threshold and movement threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TkManipulationParams {
    pub k: f64,
    pub sim_th: f64,
    pub m_th: f64,
}

/// Opaque engine handle.
pub struct TkEngine {
    engine: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs replaced"));
}

/// Runs `f`, recording any error or panic for `tk_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), (TkStatus, String)>) -> TkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TkStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TkStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (TkStatus, String) {
    (TkStatus::from(&e), e.to_string())
}

/// Borrows a required C string.
unsafe fn required_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (TkStatus, String)> {
    if p.is_null() {
        return Err((TkStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (TkStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// Borrows an optional C string; null means absent.
unsafe fn optional_str<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, (TkStatus, String)> {
    if p.is_null() {
        Ok(None)
    } else {
        required_str(p, name).map(Some)
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON output has no NUL").into_raw()
}

/// Message describing the last failed call on this thread, or "" after a
/// success. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn tk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn tk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn tk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default follow-law parameters.
#[no_mangle]
pub extern "C" fn tk_manipulation_params_default() -> TkManipulationParams {
    let p = ManipulationParams::from(&EngineConfig::default());
    TkManipulationParams {
        k: p.k,
        sim_th: p.sim_th,
        m_th: p.m_th,
    }
}

/// Fresh follow state: no movement history, no direction.
#[no_mangle]
pub extern "C" fn tk_manipulation_state_new(hand: TkVec3, object_pos: TkVec3) -> TkManipulationState {
    ManipulationState::new(hand.into(), object_pos.into()).into()
}

/// Advances one object by one tick of hand input.
///
/// # Safety
/// `state`, `params` and `out` must be valid pointers; `out` may alias `state`.
#[no_mangle]
pub unsafe extern "C" fn tk_manipulation_step(
    state: *const TkManipulationState,
    hand: TkVec3,
    active: bool,
    params: *const TkManipulationParams,
    out: *mut TkManipulationState,
) -> TkStatus {
    guard(|| {
        if state.is_null() || params.is_null() || out.is_null() {
            return Err((TkStatus::NullArgument, "state, params and out are required".into()));
        }
        let s: ManipulationState = (*state).into();
        if !s.is_valid() {
            return Err((TkStatus::Validation, "invalid manipulation state".into()));
        }
        let p = &*params;
        let params = ManipulationParams {
            k: p.k,
            sim_th: p.sim_th,
            m_th: p.m_th,
        };
        *out = manipulation::step(&s, hand.into(), active, &params).into();
        Ok(())
    })
}

/// Creates an engine.
///
/// `config_json` may be null for defaults. `condition` reads like
/// `"c=yes,s=no,e=yes"`. `calibration_json` may be null unless the condition
/// enables concentration or strain.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_engine_new(
    config_json: *const c_char,
    condition: *const c_char,
    calibration_json: *const c_char,
    out: *mut *mut TkEngine,
) -> TkStatus {
    guard(|| {
        if out.is_null() {
            return Err((TkStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let cfg = match optional_str(config_json, "config_json")? {
            Some(text) => EngineConfig::from_json(text).map_err(lib_err)?,
            None => EngineConfig::default(),
        };
        let cond: FactorCondition = required_str(condition, "condition")?
            .parse()
            .map_err(lib_err)?;
        let calib = optional_str(calibration_json, "calibration_json")?
            .map(Calibration::from_json)
            .transpose()
            .map_err(lib_err)?;
        let engine = Engine::new(cfg, cond, calib).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TkEngine { engine }));
        Ok(())
    })
}

/// Feeds one sensor frame (JSON) and returns the snapshot as canonical JSON
/// in `*out_snapshot_json`.
///
/// # Safety
/// `engine` must come from `tk_engine_new`; `frame_json` must be
/// NUL-terminated; `out_snapshot_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_engine_tick(
    engine: *mut TkEngine,
    frame_json: *const c_char,
    out_snapshot_json: *mut *mut c_char,
) -> TkStatus {
    guard(|| {
        if engine.is_null() || out_snapshot_json.is_null() {
            return Err((TkStatus::NullArgument, "engine and out are required".into()));
        }
        *out_snapshot_json = ptr::null_mut();
        let text = required_str(frame_json, "frame_json")?;
        let frame: SensorFrame =
            serde_json::from_str(text).map_err(|e| lib_err(Error::Json(e)))?;
        let snap = (*engine).engine.tick(&frame).map_err(lib_err)?;
        *out_snapshot_json = into_c_string(snap.to_json_line());
        Ok(())
    })
}

/// Destroys an engine. Null is ignored.
///
/// # Safety
/// `engine` must come from `tk_engine_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tk_engine_free(engine: *mut TkEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Upper-tail probability of the F distribution.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_f_upper_tail(f: f64, df1: f64, df2: f64, out: *mut f64) -> TkStatus {
    guard(|| {
        if out.is_null() {
            return Err((TkStatus::NullArgument, "out is null".into()));
        }
        if !(df1 > 0.0 && df2 > 0.0 && f.is_finite() && f >= 0.0) {
            return Err((TkStatus::Validation, "need f >= 0 and positive degrees of freedom".into()));
        }
        *out = f_upper_tail(f, df1, df2);
        Ok(())
    })
}

/// Aligned-rank-transform ANOVA over CSV text with header
/// `participant,concentration,strain,energy,response`. The seven effect
/// rows are returned as a JSON array.
///
/// # Safety
/// `csv_text` must be NUL-terminated; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_art_anova_csv(csv_text: *const c_char, out_json: *mut *mut c_char) -> TkStatus {
    guard(|| {
        if out_json.is_null() {
            return Err((TkStatus::NullArgument, "out_json is null".into()));
        }
        *out_json = ptr::null_mut();
        let text = required_str(csv_text, "csv_text")?;
        let table = ObservationTable::from_csv_reader(text.as_bytes(), "<csv>").map_err(lib_err)?;
        let res = art_anova(&table).map_err(lib_err)?;
        let json = to_canonical_json(&res.effects).map_err(|e| lib_err(Error::Json(e)))?;
        *out_json = into_c_string(json);
        Ok(())
    })
}
