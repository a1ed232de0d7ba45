//! C ABI over `ffd_core`.
//!
//! Every fallible function returns an [`FfdStatus`]; on failure a
//! description is available from [`ffd_last_error_message`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. No function retains caller pointers after returning.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ffd_core::circlefit::fit_circle_lsq;
use ffd_core::classifiers::{Family, TrainedModel};
use ffd_core::features::{build_feature_vector, linear_trend, skew_distance, Baselines, Line3D, FEATURE_LEN};
use ffd_core::series::{Preprocessing, TimeSeries};
use ffd_core::{Condition, Error, Eye, EyeSequence, FitClass, FrameGeometry};

/// Length of a feature vector.
pub const FFD_FEATURE_LEN: usize = 50;
/// Number of conditions; probability arrays use the order control,
/// alcohol, drug, sleep.
pub const FFD_CONDITION_COUNT: usize = 4;

const _: () = assert!(FFD_FEATURE_LEN == FEATURE_LEN && FFD_CONDITION_COUNT == Condition::COUNT);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfdStatus {
    Ok = 0,
    NullArgument = 1,
    /// Wrong length, non-finite value, bad UTF-8 or similar.
    InvalidArgument = 2,
    Io = 3,
    /// A file exists but does not have the expected format or version.
    Parse = 4,
    MissingInput = 5,
    /// The input is well formed but cannot be analysed (too short, too
    /// many gaps, degenerate geometry).
    Unusable = 6,
    /// A panic inside the library.
    Internal = 7,
}

/// Trained classifier loaded from a model JSON file.
pub struct FfdModel {
    inner: TrainedModel,
}

/// Per-condition baseline curves loaded from a baselines JSON file.
pub struct FfdBaselines {
    inner: Baselines,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FfdPrediction {
    /// Index into control, alcohol, drug, sleep.
    pub condition: u32,
    pub probabilities: [f64; FFD_CONDITION_COUNT],
    pub fit: bool,
    /// One minus the control probability.
    pub unfit_score: f64,
}

/// One frame of eye geometry in pixels; `valid` is 0 for blinks and
/// failed localisations.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FfdFrame {
    pub t: f64,
    pub pupil_rx: f64,
    pub pupil_ry: f64,
    pub iris_rx: f64,
    pub iris_ry: f64,
    pub pupil_cx: f64,
    pub pupil_cy: f64,
    pub iris_cx: f64,
    pub iris_cy: f64,
    pub valid: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FfdCircle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub rms_error: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FfdTrend {
    pub m: f64,
    pub b: f64,
}

/// The line through `point` with direction `(1, m_x, m_y)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FfdLine {
    pub point: [f64; 3],
    pub m_x: f64,
    pub m_y: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FfdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => FfdStatus::Io,
            Error::MissingInput { .. } => FfdStatus::MissingInput,
            Error::MissingColumn { .. }
            | Error::Parse { .. }
            | Error::DuplicateRow { .. }
            | Error::Json { .. }
            | Error::Image { .. }
            | Error::ModelVersion(_) => FfdStatus::Parse,
            Error::Unrecoverable { .. }
            | Error::TooManyGaps { .. }
            | Error::TooShort { .. }
            | Error::SparseWindow { .. }
            | Error::DegenerateTrend
            | Error::Collinear(_)
            | Error::NoTargetPixels(_) => FfdStatus::Unusable,
            _ => FfdStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: FfdStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FfdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FfdStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {what}"));
            FfdStatus::Internal
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        fail(FfdStatus::NullArgument, format!("{name} is NULL"))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be NULL only when `len` is 0, and otherwise point to `len`
/// readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    non_null(p, "path")?;
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => fail(FfdStatus::InvalidArgument, "path is not valid UTF-8"),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ffd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on the calling thread, or NULL if no
/// call has failed yet. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn ffd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static lowercase name of a condition index, or NULL when out of range.
#[no_mangle]
pub extern "C" fn ffd_condition_name(condition: u32) -> *const c_char {
    let name: &'static [u8] = match Condition::from_index(condition as usize) {
        Some(Condition::Control) => b"control\0",
        Some(Condition::Alcohol) => b"alcohol\0",
        Some(Condition::Drug) => b"drug\0",
        Some(Condition::Sleep) => b"sleep\0",
        None => return ptr::null(),
    };
    name.as_ptr().cast()
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ffd_model_load(path: *const c_char, out: *mut *mut FfdModel) -> FfdStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = TrainedModel::load(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(FfdModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`ffd_model_load`] and not be used afterwards.
/// NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ffd_model_free(model: *mut FfdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Static name of the model family, or NULL for a NULL model.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ffd_model_family(model: *const FfdModel) -> *const c_char {
    let Some(m) = model.as_ref() else {
        return ptr::null();
    };
    let name: &'static [u8] = match m.inner.spec.family() {
        Family::RandomForest => b"random_forest\0",
        Family::GradientBoosting => b"gradient_boosting\0",
        Family::Mlp => b"mlp\0",
    };
    name.as_ptr().cast()
}

/// Classifies one feature vector of `len` values.
///
/// # Safety
/// `model` must be a live handle, `features` must point to `len` doubles
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffd_model_predict(
    model: *const FfdModel,
    features: *const f64,
    len: usize,
    out: *mut FfdPrediction,
) -> FfdStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        let x = slice(features, len, "features")?;
        let p = (*model).inner.predict(x)?;
        *out = FfdPrediction {
            condition: p.condition.index() as u32,
            probabilities: p.probabilities,
            fit: p.fit_class() == FitClass::Fit,
            unfit_score: p.unfit_score,
        };
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ffd_baselines_load(path: *const c_char, out: *mut *mut FfdBaselines) -> FfdStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = Baselines::load(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(FfdBaselines { inner }));
        Ok(())
    })
}

/// # Safety
/// `baselines` must come from [`ffd_baselines_load`] and not be used
/// afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ffd_baselines_free(baselines: *mut FfdBaselines) {
    if !baselines.is_null() {
        drop(Box::from_raw(baselines));
    }
}

/// Feature vector of one eye sequence with the default preprocessing.
/// `out` receives [`FFD_FEATURE_LEN`] values; `out_len` must be at least
/// that.
///
/// # Safety
/// `baselines` must be a live handle, `frames` must point to `n_frames`
/// frames and `out` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ffd_extract_features(
    baselines: *const FfdBaselines,
    frames: *const FfdFrame,
    n_frames: usize,
    fps: f64,
    out: *mut f64,
    out_len: usize,
) -> FfdStatus {
    guard(|| {
        non_null(baselines, "baselines")?;
        non_null(out, "out")?;
        if out_len < FFD_FEATURE_LEN {
            return fail(
                FfdStatus::InvalidArgument,
                format!("output buffer holds {out_len} values, {FFD_FEATURE_LEN} needed"),
            );
        }
        if !(fps.is_finite() && fps > 0.0) {
            return fail(FfdStatus::InvalidArgument, format!("fps must be positive, got {fps}"));
        }
        let frames = slice(frames, n_frames, "frames")?
            .iter()
            .map(|f| FrameGeometry {
                t: f.t,
                pupil_rx: f.pupil_rx,
                pupil_ry: f.pupil_ry,
                iris_rx: f.iris_rx,
                iris_ry: f.iris_ry,
                pupil_cx: f.pupil_cx,
                pupil_cy: f.pupil_cy,
                iris_cx: f.iris_cx,
                iris_cy: f.iris_cy,
                valid: f.valid != 0,
            })
            .collect();
        // The condition label does not influence the features.
        let seq = EyeSequence {
            id: String::new(),
            eye: Eye::Left,
            condition: Condition::Control,
            fps,
            frames,
        };
        let v = build_feature_vector(&seq, &(*baselines).inner, &Preprocessing::default())?;
        std::slice::from_raw_parts_mut(out, FFD_FEATURE_LEN).copy_from_slice(v.features());
        Ok(())
    })
}

/// Least-squares circle through `n` points.
///
/// # Safety
/// `xs` and `ys` must each point to `n` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffd_fit_circle(xs: *const f64, ys: *const f64, n: usize, out: *mut FfdCircle) -> FfdStatus {
    guard(|| {
        non_null(out, "out")?;
        let pts: Vec<(f64, f64)> = slice(xs, n, "xs")?
            .iter()
            .copied()
            .zip(slice(ys, n, "ys")?.iter().copied())
            .collect();
        let c = fit_circle_lsq(&pts)?;
        *out = FfdCircle {
            cx: c.cx,
            cy: c.cy,
            r: c.r,
            rms_error: c.rms_error,
        };
        Ok(())
    })
}

/// Least-squares line through samples taken at `t0 + i * dt`. `mask` may be
/// NULL (all valid); otherwise samples with a zero mask byte are ignored.
///
/// # Safety
/// `values` (and `mask` when not NULL) must point to `n` elements and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffd_linear_trend(
    values: *const f64,
    mask: *const u8,
    n: usize,
    t0: f64,
    dt: f64,
    out: *mut FfdTrend,
) -> FfdStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = slice(values, n, "values")?.to_vec();
        let m = if mask.is_null() {
            vec![true; n]
        } else {
            slice(mask, n, "mask")?.iter().map(|&b| b != 0).collect()
        };
        let t = linear_trend(&TimeSeries::new(t0, dt, v, m)?)?;
        *out = FfdTrend { m: t.m, b: t.b };
        Ok(())
    })
}

/// Shortest distance between two lines, with a parallel-line fallback.
///
/// # Safety
/// `a` and `b` must point to readable lines and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ffd_skew_distance(a: *const FfdLine, b: *const FfdLine, out: *mut f64) -> FfdStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        let line = |l: &FfdLine| Line3D::new(l.point, l.m_x, l.m_y);
        *out = skew_distance(&line(&*a), &line(&*b));
        Ok(())
    })
}
