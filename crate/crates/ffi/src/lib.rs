//! C ABI for `cairo-air`.
//!
//! Programs and proofs are opaque handles. Every call returns a
//! [`CairoAirStatus`]; on failure `cairo_air_last_error_message` describes
//! the error for the calling thread. Strings returned through out-pointers
//! are owned by the caller and released with `cairo_air_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cairo_air::corpus;
use cairo_air::extract::{soundness_check, SoundnessOutcome};
use cairo_air::interaction::Sha256Oracle;
use cairo_air::io::{self, ColumnsFile, ProgramFile, StatementFile, WitnessFile};
use cairo_air::program::Program;
use cairo_air::prove::{prove_program, verify_proof};
use cairo_air::trace::{ColumnSet, PublicStatement};

/// Result of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CairoAirStatus {
    Ok = 0,
    /// Null pointer, non UTF-8 string or unknown name.
    InvalidArgument = 1,
    /// Malformed JSON or field element.
    Parse = 2,
    /// The machine could not execute the program.
    Execution = 3,
    /// Columns satisfy every constraint but extraction or re-validation failed.
    Consistency = 4,
    /// Constraint violations or a challenge mismatch.
    Verification = 5,
    /// Column shapes do not match the statement.
    Format = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

/// A loaded program: memory, initial registers and public memory.
pub struct CairoAirProgram {
    program: Program,
}

/// A public statement with its column set.
pub struct CairoAirProof {
    statement: PublicStatement,
    columns: ColumnSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Error(CairoAirStatus, String);

fn err(status: CairoAirStatus, e: impl ToString) -> Error {
    Error(status, e.to_string())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> CairoAirStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CairoAirStatus::Ok
        }
        Ok(Err(Error(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            CairoAirStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(err(CairoAirStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| err(CairoAirStatus::InvalidArgument, format!("{what}: {e}")))
}

/// Null means goldilocks.
unsafe fn modulus(p: *const c_char) -> Result<cairo_air::field::Field, Error> {
    let s = if p.is_null() { "goldilocks" } else { text(p, "modulus")? };
    io::parse_modulus(s).map_err(|e| err(CairoAirStatus::Parse, e))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Error> {
    p.as_ref().ok_or_else(|| err(CairoAirStatus::InvalidArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(err(CairoAirStatus::InvalidArgument, "output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_json<T: serde::Serialize>(out: *mut *mut c_char, value: &T) -> Result<(), Error> {
    if out.is_null() {
        return Err(err(CairoAirStatus::InvalidArgument, "output pointer is null"));
    }
    let s = serde_json::to_string(value).map_err(|e| err(CairoAirStatus::Parse, e))?;
    *out = CString::new(s).map_err(|e| err(CairoAirStatus::Parse, e))?.into_raw();
    Ok(())
}

fn json<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<T, Error> {
    serde_json::from_str(s).map_err(|e| err(CairoAirStatus::Parse, format!("{what}: {e}")))
}

/// Negative means run until the final self-jump.
fn steps(n: i64) -> Option<usize> {
    usize::try_from(n).ok()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn cairo_air_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a program file. `modulus` is `goldilocks`, `cairo`, a decimal
/// prime, or null for goldilocks.
///
/// # Safety
/// Pointers must be null or valid; `out` receives a handle to free with
/// `cairo_air_program_free`.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_program_from_json(
    program_json: *const c_char,
    modulus_name: *const c_char,
    out: *mut *mut CairoAirProgram,
) -> CairoAirStatus {
    guard(|| {
        let f = modulus(modulus_name)?;
        let file: ProgramFile = json(text(program_json, "program")?, "program")?;
        let program = file.into_program(f).map_err(|e| err(CairoAirStatus::Parse, e))?;
        put(out, CairoAirProgram { program })
    })
}

/// One of the built-in sample programs.
///
/// # Safety
/// As for `cairo_air_program_from_json`.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_program_corpus(
    name: *const c_char,
    modulus_name: *const c_char,
    out: *mut *mut CairoAirProgram,
) -> CairoAirStatus {
    guard(|| {
        let f = modulus(modulus_name)?;
        let name = text(name, "name")?;
        let program = corpus::build(name, f)
            .ok_or_else(|| err(CairoAirStatus::InvalidArgument, format!("unknown program {name:?}")))?
            .map_err(|e| err(CairoAirStatus::Execution, e))?;
        put(out, CairoAirProgram { program })
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_program_free(p: *mut CairoAirProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Serializes the program back to its file format.
///
/// # Safety
/// `program` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_program_to_json(
    program: *const CairoAirProgram,
    out: *mut *mut c_char,
) -> CairoAirStatus {
    guard(|| {
        let p = handle(program, "program")?;
        put_json(out, &ProgramFile::from_program(&p.program))
    })
}

/// Executes `steps` steps (negative: until the final self-jump) and writes
/// the register trace as JSON.
///
/// # Safety
/// `program` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_program_run(
    program: *const CairoAirProgram,
    steps_or_negative: i64,
    out: *mut *mut c_char,
) -> CairoAirStatus {
    guard(|| {
        let p = handle(program, "program")?;
        let trace = p.program.run(steps(steps_or_negative)).map_err(|e| err(CairoAirStatus::Execution, e))?;
        put_json(out, &io::trace_to_json(&trace))
    })
}

/// Runs, pads and builds the statement and column set.
///
/// # Safety
/// `program` must be a live handle; `out` receives a handle to free with
/// `cairo_air_proof_free`.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_prove(
    program: *const CairoAirProgram,
    steps_or_negative: i64,
    out: *mut *mut CairoAirProof,
) -> CairoAirStatus {
    guard(|| {
        let p = handle(program, "program")?;
        let (_, proof) = prove_program(&p.program, steps(steps_or_negative), &Sha256Oracle)
            .map_err(|e| err(CairoAirStatus::Execution, e))?;
        put(out, CairoAirProof { statement: proof.statement, columns: proof.columns })
    })
}

/// Loads a statement and column set from their JSON files.
///
/// # Safety
/// As for `cairo_air_prove`.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_proof_from_json(
    statement_json: *const c_char,
    columns_json: *const c_char,
    out: *mut *mut CairoAirProof,
) -> CairoAirStatus {
    guard(|| {
        let s: StatementFile = json(text(statement_json, "statement")?, "statement")?;
        let c: ColumnsFile = json(text(columns_json, "columns")?, "columns")?;
        let statement = s.into_statement().map_err(|e| err(CairoAirStatus::Parse, e))?;
        let columns = c.into_columns().map_err(|e| err(CairoAirStatus::Parse, e))?;
        put(out, CairoAirProof { statement, columns })
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_proof_free(p: *mut CairoAirProof) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `proof` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_proof_statement_json(
    proof: *const CairoAirProof,
    out: *mut *mut c_char,
) -> CairoAirStatus {
    guard(|| put_json(out, &StatementFile::from_statement(&handle(proof, "proof")?.statement, None)))
}

/// # Safety
/// `proof` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_proof_columns_json(
    proof: *const CairoAirProof,
    out: *mut *mut c_char,
) -> CairoAirStatus {
    guard(|| put_json(out, &ColumnsFile::from_columns(&handle(proof, "proof")?.columns)))
}

/// Re-derives the challenges and evaluates every constraint. Returns `Ok`
/// when accepted and `Verification` otherwise. `violations`, if not null,
/// receives the number of violated constraint instances.
///
/// # Safety
/// `proof` must be a live handle; `violations` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_proof_verify(
    proof: *const CairoAirProof,
    violations: *mut u64,
) -> CairoAirStatus {
    guard(|| {
        let p = handle(proof, "proof")?;
        let verdict =
            verify_proof(&p.statement, &p.columns, &Sha256Oracle).map_err(|e| err(CairoAirStatus::Format, e))?;
        if !violations.is_null() {
            *violations = verdict.report.len() as u64;
        }
        if verdict.challenge_mismatch.is_some() {
            return Err(err(CairoAirStatus::Verification, "challenge mismatch"));
        }
        match verdict.report.violations.first() {
            None => Ok(()),
            Some(v) => Err(err(
                CairoAirStatus::Verification,
                format!("{} violation(s); first: {}.{} at row {}", verdict.report.len(), v.group.name(), v.name, v.row),
            )),
        }
    })
}

/// Reconstructs memory and the register trace and writes them as JSON.
///
/// # Safety
/// `proof` must be a live handle; `out` receives a string to free.
#[no_mangle]
pub unsafe extern "C" fn cairo_air_proof_extract(
    proof: *const CairoAirProof,
    out: *mut *mut c_char,
) -> CairoAirStatus {
    guard(|| {
        let p = handle(proof, "proof")?;
        match soundness_check(&p.statement, &p.columns).map_err(|e| err(CairoAirStatus::Format, e))? {
            SoundnessOutcome::Witness(w) => put_json(out, &WitnessFile::from_witness(&w)),
            SoundnessOutcome::Violations(r) => {
                Err(err(CairoAirStatus::Verification, format!("{} constraint violation(s)", r.len())))
            }
            SoundnessOutcome::SemanticFailure(e) => Err(err(CairoAirStatus::Consistency, e)),
        }
    })
}
