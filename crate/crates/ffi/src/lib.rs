//! C ABI over `ngn-motion`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`NgnStatus`]; on failure [`ngn_last_error`] describes the most recent
//! error on the calling thread. Strings returned by the library are freed
//! with [`ngn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ngn_motion::bvh::{self, Label, MotionClip, Skeleton};
use ngn_motion::metrics;
use ngn_motion::ngn::{ClassModel, TrainConfig};
use ngn_motion::seed::rng_for;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Training = 5,
    Generation = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A parsed BVH document: skeleton plus motion.
pub struct NgnMotion {
    skeleton: Skeleton,
    clip: MotionClip,
}

/// A trained class network with its standardization.
pub struct NgnModel {
    model: ClassModel,
}

/// Training hyperparameters. Start from [`ngn_train_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgnTrainConfig {
    pub neuron_count: usize,
    pub iterations: usize,
    pub epsilon_initial: f64,
    pub epsilon_final: f64,
    pub lambda_initial: f64,
    pub lambda_final: f64,
    pub noise_std: f64,
    pub smoothing_sigma: f64,
    pub seed: u64,
}

impl From<NgnTrainConfig> for TrainConfig {
    fn from(c: NgnTrainConfig) -> Self {
        TrainConfig {
            neuron_count: c.neuron_count,
            iterations: c.iterations,
            epsilon_initial: c.epsilon_initial,
            epsilon_final: c.epsilon_final,
            lambda_initial: c.lambda_initial,
            lambda_final: c.lambda_final,
            noise_std: c.noise_std,
            smoothing_sigma: c.smoothing_sigma,
            seed: c.seed,
            ..TrainConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

type Res<T> = Result<T, (NgnStatus, String)>;

fn guard(f: impl FnOnce() -> Res<()>) -> NgnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NgnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NgnStatus::Panic
        }
    }
}

fn null() -> (NgnStatus, String) {
    (NgnStatus::NullPointer, "null pointer argument".into())
}

unsafe fn as_ref<'a, T>(p: *const T) -> Res<&'a T> {
    p.as_ref().ok_or_else(null)
}

unsafe fn as_str<'a>(p: *const c_char) -> Res<&'a str> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| (NgnStatus::InvalidUtf8, e.to_string()))
}

unsafe fn put<T>(out: *mut T, v: T) -> Res<()> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul removed").into_raw()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ngn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a NUL-terminated BVH document.
///
/// # Safety
/// `text` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_parse(text: *const c_char, out: *mut *mut NgnMotion) -> NgnStatus {
    guard(|| {
        let text = as_str(text)?;
        let (skeleton, clip) = bvh::parse_bvh(text).map_err(|e| (NgnStatus::Parse, e.to_string()))?;
        put(out, Box::into_raw(Box::new(NgnMotion { skeleton, clip })))
    })
}

/// Serialize back to BVH text; free the result with [`ngn_string_free`].
///
/// # Safety
/// `motion` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_to_bvh(motion: *const NgnMotion, out: *mut *mut c_char) -> NgnStatus {
    guard(|| {
        let m = as_ref(motion)?;
        let text = bvh::write_bvh(&m.skeleton, &m.clip).map_err(|e| (NgnStatus::InvalidArgument, e.to_string()))?;
        put(out, to_c_string(text))
    })
}

/// Number of frames; 0 for NULL.
///
/// # Safety
/// `motion` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_frame_count(motion: *const NgnMotion) -> usize {
    motion.as_ref().map_or(0, |m| m.clip.frame_count())
}

/// Channels per frame; 0 for NULL.
///
/// # Safety
/// `motion` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_channel_count(motion: *const NgnMotion) -> usize {
    motion.as_ref().map_or(0, |m| m.skeleton.total_channels)
}

/// Joints, end sites included; 0 for NULL.
///
/// # Safety
/// `motion` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_joint_count(motion: *const NgnMotion) -> usize {
    motion.as_ref().map_or(0, |m| m.skeleton.joint_count())
}

/// Seconds per frame; 0 for NULL.
///
/// # Safety
/// `motion` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_frame_time(motion: *const NgnMotion) -> f64 {
    motion.as_ref().map_or(0.0, |m| m.clip.frame_time)
}

/// Copy all frames row-major into `buf`, which holds `len` doubles and needs
/// frames × channels of them.
///
/// # Safety
/// `motion` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_copy_frames(motion: *const NgnMotion, buf: *mut f64, len: usize) -> NgnStatus {
    guard(|| {
        let m = as_ref(motion)?;
        if buf.is_null() {
            return Err(null());
        }
        let need = m.clip.frame_count() * m.skeleton.total_channels;
        if len < need {
            return Err((NgnStatus::BufferTooSmall, format!("need {need} values, got {len}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (chunk, row) in dst.chunks_exact_mut(m.skeleton.total_channels.max(1)).zip(&m.clip.frames) {
            chunk.copy_from_slice(row);
        }
        Ok(())
    })
}

/// # Safety
/// `motion` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_motion_free(motion: *mut NgnMotion) {
    if !motion.is_null() {
        drop(Box::from_raw(motion));
    }
}

#[no_mangle]
pub extern "C" fn ngn_train_config_default() -> NgnTrainConfig {
    let d = TrainConfig::default();
    NgnTrainConfig {
        neuron_count: d.neuron_count,
        iterations: d.iterations,
        epsilon_initial: d.epsilon_initial,
        epsilon_final: d.epsilon_final,
        lambda_initial: d.lambda_initial,
        lambda_final: d.lambda_final,
        noise_std: d.noise_std,
        smoothing_sigma: d.smoothing_sigma,
        seed: d.seed,
    }
}

/// Train a class network on `count` clips sharing one channel layout.
///
/// # Safety
/// `clips` must point to `count` live handles; `config`, `label` and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn ngn_model_train(
    clips: *const *const NgnMotion,
    count: usize,
    config: *const NgnTrainConfig,
    label: *const c_char,
    out: *mut *mut NgnModel,
) -> NgnStatus {
    guard(|| {
        if clips.is_null() {
            return Err(null());
        }
        let config = TrainConfig::from(*as_ref(config)?);
        let label = Label::from(as_str(label)?);
        let handles = std::slice::from_raw_parts(clips, count);
        let clips = handles
            .iter()
            .map(|&h| as_ref(h).map(|m| m.clip.clone().with_label(label.clone())))
            .collect::<Res<Vec<_>>>()?;
        let model = ClassModel::train(&clips, &config).map_err(|e| (NgnStatus::Training, e.to_string()))?;
        put(out, Box::into_raw(Box::new(NgnModel { model })))
    })
}

/// Generate one clip conditioned on `reference`. The result reuses the
/// reference skeleton; equal seeds give equal output.
///
/// # Safety
/// `model` and `reference` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngn_model_generate(
    model: *const NgnModel,
    reference: *const NgnMotion,
    seed: u64,
    out: *mut *mut NgnMotion,
) -> NgnStatus {
    guard(|| {
        let model = as_ref(model)?;
        let reference = as_ref(reference)?;
        let mut rng = rng_for(seed, &[]);
        let clip = model
            .model
            .generate(&reference.clip, &mut rng)
            .map_err(|e| (NgnStatus::Generation, e.to_string()))?;
        put(out, Box::into_raw(Box::new(NgnMotion { skeleton: reference.skeleton.clone(), clip })))
    })
}

/// Number of recorded training iterations; 0 for NULL.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_model_error_len(model: *const NgnModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.field.error_history.len())
}

/// Copy the per-iteration average error into `buf` (capacity `len`).
///
/// # Safety
/// `model` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ngn_model_error_history(model: *const NgnModel, buf: *mut f64, len: usize) -> NgnStatus {
    guard(|| {
        let history = &as_ref(model)?.model.field.error_history;
        if buf.is_null() {
            return Err(null());
        }
        if len < history.len() {
            return Err((NgnStatus::BufferTooSmall, format!("need {} values, got {len}", history.len())));
        }
        std::slice::from_raw_parts_mut(buf, history.len()).copy_from_slice(history);
        Ok(())
    })
}

/// Serialize to the JSON artifact format; free with [`ngn_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngn_model_to_json(model: *const NgnModel, out: *mut *mut c_char) -> NgnStatus {
    guard(|| put(out, to_c_string(as_ref(model)?.model.to_json())))
}

/// # Safety
/// `json` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngn_model_from_json(json: *const c_char, out: *mut *mut NgnModel) -> NgnStatus {
    guard(|| {
        let model = ClassModel::from_json(as_str(json)?).map_err(|e| (NgnStatus::Parse, e.to_string()))?;
        put(out, Box::into_raw(Box::new(NgnModel { model })))
    })
}

/// # Safety
/// `model` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ngn_model_free(model: *mut NgnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dynamic time warping distance between the raw channel frames of two
/// clips with equal channel counts.
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ngn_dtw(a: *const NgnMotion, b: *const NgnMotion, out: *mut f64) -> NgnStatus {
    guard(|| {
        let (a, b) = (as_ref(a)?, as_ref(b)?);
        let d = metrics::dtw(&a.clip.frames, &b.clip.frames).map_err(|e| (NgnStatus::InvalidArgument, e.to_string()))?;
        put(out, d)
    })
}
