//! JSON file formats. Field elements are decimal strings of their canonical
//! value; counts and bounds that always fit in 64 bits are plain numbers.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::extract::ExtractedWitness;
use crate::field::{Felt, Field, FieldConfig, FieldError};
use crate::interaction::Challenges;
use crate::isa::semantics::{RegisterState, SparseMemory};
use crate::program::Program;
use crate::prove::Transcript;
use crate::trace::{ColumnSet, CpuCol, ExecutionColumns, MemorySegment, PublicStatement, RcSegment};

/// Layout tag written into every column-set file.
pub const COLUMNS_LAYOUT: &str = "cairo-air-logical/v1";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{0}")]
    Format(String),
}

/// `goldilocks`, `cairo`, or a decimal prime.
pub fn parse_modulus(s: &str) -> Result<Field, IoError> {
    match s {
        "goldilocks" => Ok(FieldConfig::goldilocks()),
        "cairo" => Ok(FieldConfig::cairo()),
        _ => {
            let n: BigUint = s.parse().map_err(|_| IoError::Format(format!("bad modulus {s:?}")))?;
            Ok(FieldConfig::new(&n)?)
        }
    }
}

fn felt(f: Field, s: &str) -> Result<Felt, IoError> {
    Ok(f.parse(s)?)
}

fn felts(f: Field, xs: &[String]) -> Result<Vec<Felt>, IoError> {
    xs.iter().map(|s| felt(f, s)).collect()
}

fn strings(xs: &[Felt]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn map_out(m: &BTreeMap<Felt, Felt>) -> BTreeMap<String, String> {
    m.iter().map(|(a, v)| (a.to_string(), v.to_string())).collect()
}

fn map_in(f: Field, m: &BTreeMap<String, String>) -> Result<BTreeMap<Felt, Felt>, IoError> {
    m.iter().map(|(a, v)| Ok((felt(f, a)?, felt(f, v)?))).collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProgramFile {
    pub initial_pc: String,
    pub initial_ap: String,
    pub memory: BTreeMap<String, String>,
    #[serde(default)]
    pub public_memory: BTreeMap<String, String>,
}

impl ProgramFile {
    pub fn from_program(p: &Program) -> Self {
        ProgramFile {
            initial_pc: p.initial_pc.to_string(),
            initial_ap: p.initial_ap.to_string(),
            memory: map_out(p.memory.as_map()),
            public_memory: map_out(&p.m_star),
        }
    }

    pub fn into_program(&self, f: Field) -> Result<Program, IoError> {
        let mut memory = SparseMemory::new(f);
        for (a, v) in map_in(f, &self.memory)? {
            memory.set(a, v);
        }
        Ok(Program {
            memory,
            initial_pc: felt(f, &self.initial_pc)?,
            initial_ap: felt(f, &self.initial_ap)?,
            m_star: map_in(f, &self.public_memory)?,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StateRecord {
    pub pc: String,
    pub ap: String,
    pub fp: String,
}

pub fn trace_to_json(trace: &[RegisterState]) -> Vec<StateRecord> {
    trace
        .iter()
        .map(|s| StateRecord { pc: s.pc.to_string(), ap: s.ap.to_string(), fp: s.fp.to_string() })
        .collect()
}

pub fn trace_from_json(f: Field, records: &[StateRecord]) -> Result<Vec<RegisterState>, IoError> {
    records
        .iter()
        .map(|r| Ok(RegisterState::new(felt(f, &r.pc)?, felt(f, &r.ap)?, felt(f, &r.fp)?)))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub version: String,
    /// Hex.
    pub commitment: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatementFile {
    pub modulus: String,
    pub trace_length: u64,
    pub initial_pc: String,
    pub initial_ap: String,
    pub final_pc: String,
    pub final_ap: String,
    pub public_memory: BTreeMap<String, String>,
    pub rc_min: u64,
    pub rc_max: u64,
    pub alpha: String,
    pub z_mem: String,
    pub z_rc: String,
    pub public_memory_prod: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<TranscriptRecord>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl StatementFile {
    pub fn from_statement(s: &PublicStatement, transcript: Option<&Transcript>) -> Self {
        StatementFile {
            modulus: s.field.modulus().to_string(),
            trace_length: s.trace_length,
            initial_pc: s.initial_pc.to_string(),
            initial_ap: s.initial_ap.to_string(),
            final_pc: s.final_pc.to_string(),
            final_ap: s.final_ap.to_string(),
            public_memory: map_out(&s.m_star),
            rc_min: s.rc_min,
            rc_max: s.rc_max,
            alpha: s.alpha.to_string(),
            z_mem: s.z_mem.to_string(),
            z_rc: s.z_rc.to_string(),
            public_memory_prod: s.public_memory_prod.to_string(),
            transcript: transcript.map(|t| TranscriptRecord { version: t.version.clone(), commitment: hex(&t.commitment) }),
        }
    }

    pub fn into_statement(&self) -> Result<PublicStatement, IoError> {
        let f = parse_modulus(&self.modulus)?;
        Ok(PublicStatement {
            field: f,
            trace_length: self.trace_length,
            initial_pc: felt(f, &self.initial_pc)?,
            initial_ap: felt(f, &self.initial_ap)?,
            final_pc: felt(f, &self.final_pc)?,
            final_ap: felt(f, &self.final_ap)?,
            m_star: map_in(f, &self.public_memory)?,
            rc_min: self.rc_min,
            rc_max: self.rc_max,
            alpha: felt(f, &self.alpha)?,
            z_mem: felt(f, &self.z_mem)?,
            z_rc: felt(f, &self.z_rc)?,
            public_memory_prod: felt(f, &self.public_memory_prod)?,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MemoryRecord {
    pub a: Vec<String>,
    pub v: Vec<String>,
    pub a_sorted: Vec<String>,
    pub v_sorted: Vec<String>,
    pub prod: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RangeCheckRecord {
    pub pool: Vec<String>,
    pub sorted: Vec<String>,
    pub prod: Vec<String>,
    pub rc_min: u64,
    pub rc_max: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ColumnsFile {
    pub layout: String,
    pub modulus: String,
    pub trace_length: u64,
    pub cpu: BTreeMap<String, Vec<String>>,
    pub memory: MemoryRecord,
    pub range_check: RangeCheckRecord,
}

impl ColumnsFile {
    pub fn from_columns(cols: &ColumnSet) -> Self {
        let m = &cols.memory;
        let r = &cols.range_check;
        ColumnsFile {
            layout: COLUMNS_LAYOUT.into(),
            modulus: cols.cpu.field().modulus().to_string(),
            trace_length: 16 * cols.cpu.rows() as u64,
            cpu: CpuCol::all().map(|c| (c.name(), strings(cols.cpu.column(c)))).collect(),
            memory: MemoryRecord {
                a: strings(&m.a),
                v: strings(&m.v),
                a_sorted: strings(&m.a_sorted),
                v_sorted: strings(&m.v_sorted),
                prod: strings(&m.prod),
            },
            range_check: RangeCheckRecord {
                pool: strings(&r.pool),
                sorted: strings(&r.sorted),
                prod: strings(&r.prod),
                rc_min: r.rc_min,
                rc_max: r.rc_max,
            },
        }
    }

    pub fn into_columns(&self) -> Result<ColumnSet, IoError> {
        if self.layout != COLUMNS_LAYOUT {
            return Err(IoError::Format(format!("unknown column layout {:?}", self.layout)));
        }
        let f = parse_modulus(&self.modulus)?;
        if self.cpu.len() != CpuCol::COUNT {
            return Err(IoError::Format(format!("expected {} cpu columns, found {}", CpuCol::COUNT, self.cpu.len())));
        }
        let cpu_cols = CpuCol::all()
            .map(|c| {
                let xs = self.cpu.get(&c.name()).ok_or_else(|| IoError::Format(format!("missing cpu column {}", c.name())))?;
                felts(f, xs)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let cpu = ExecutionColumns::from_columns(f, cpu_cols).map_err(|e| IoError::Format(e.to_string()))?;
        if self.trace_length != 16 * cpu.rows() as u64 {
            return Err(IoError::Format(format!("header trace_length {} disagrees with {} cpu rows", self.trace_length, cpu.rows())));
        }
        let m = &self.memory;
        let r = &self.range_check;
        Ok(ColumnSet {
            cpu,
            memory: MemorySegment {
                a: felts(f, &m.a)?,
                v: felts(f, &m.v)?,
                a_sorted: felts(f, &m.a_sorted)?,
                v_sorted: felts(f, &m.v_sorted)?,
                prod: felts(f, &m.prod)?,
            },
            range_check: RcSegment {
                pool: felts(f, &r.pool)?,
                sorted: felts(f, &r.sorted)?,
                prod: felts(f, &r.prod)?,
                rc_min: r.rc_min,
                rc_max: r.rc_max,
            },
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub memory: BTreeMap<String, String>,
    pub exec: Vec<StateRecord>,
}

impl WitnessFile {
    pub fn from_witness(w: &ExtractedWitness) -> Self {
        WitnessFile { memory: map_out(w.memory.support()), exec: trace_to_json(&w.exec) }
    }
}

#[derive(Debug, Serialize)]
pub struct ChallengeRecord {
    pub alpha: String,
    pub z_mem: String,
    pub z_rc: String,
}

impl From<&Challenges> for ChallengeRecord {
    fn from(c: &Challenges) -> Self {
        ChallengeRecord { alpha: c.alpha.to_string(), z_mem: c.z_mem.to_string(), z_rc: c.z_rc.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::interaction::Sha256Oracle;
    use crate::prove::prove_program;

    #[test]
    fn modulus_names() {
        assert_eq!(parse_modulus("goldilocks").unwrap(), FieldConfig::goldilocks());
        assert_eq!(parse_modulus("97").unwrap().modulus_u64(), Some(97));
        assert!(parse_modulus("91").is_err());
        assert!(parse_modulus("x").is_err());
    }

    #[test]
    fn files_roundtrip() {
        let f = FieldConfig::goldilocks();
        let p = corpus::countdown(f, 2).unwrap();
        let back = ProgramFile::from_program(&p).into_program(f).unwrap();
        assert_eq!(back, p);
        let (trace, proof) = prove_program(&p, None, &Sha256Oracle).unwrap();
        let json = serde_json::to_string(&trace_to_json(&trace)).unwrap();
        let recs: Vec<StateRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(trace_from_json(f, &recs).unwrap(), trace);
        let s = serde_json::to_string(&StatementFile::from_statement(&proof.statement, Some(&proof.transcript))).unwrap();
        let s: StatementFile = serde_json::from_str(&s).unwrap();
        assert_eq!(s.into_statement().unwrap(), proof.statement);
        assert_eq!(s.transcript.unwrap().commitment, hex(&proof.transcript.commitment));
        let c = serde_json::to_string(&ColumnsFile::from_columns(&proof.columns)).unwrap();
        let c: ColumnsFile = serde_json::from_str(&c).unwrap();
        assert_eq!(c.into_columns().unwrap(), proof.columns);
    }

    #[test]
    fn rejects_noncanonical_values() {
        let f = FieldConfig::from_u64(97).unwrap();
        let file = ProgramFile {
            initial_pc: "1".into(),
            initial_ap: "97".into(),
            memory: BTreeMap::new(),
            public_memory: BTreeMap::new(),
        };
        assert!(matches!(file.into_program(f), Err(IoError::Field(_))));
    }
}
