//! JSON file formats. Matrices are row-major with entries as [re, im]
//! pairs; every document carries a schema tag so the CLI can dispatch on it.

use crate::boundary::BoundaryModel;
use crate::cylinder::{BoundarySpectralModel, DegreeSpectrum, SpectralEntry};
use crate::graded::GradedChainComplex;
use crate::linalg::{ComplexMatrix, C64};
use crate::twisted::{BoundaryTerm, TwistedComplexSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const COMPLEX_SCHEMA: &str = "torsionlab/complex/v1";
pub const BOUNDARY_MODEL_SCHEMA: &str = "torsionlab/boundary-model/v1";
pub const BOUNDARY_SPECTRUM_SCHEMA: &str = "torsionlab/boundary-spectrum/v1";
pub const TWISTED_SCHEMA: &str = "torsionlab/twisted-complex/v1";
pub const REPORT_SCHEMA: &str = "torsionlab/report/v1";

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unexpected schema tag {found:?} (wanted {wanted})")]
    WrongSchema { wanted: &'static str, found: String },
    #[error("matrix entry count {found} does not match {rows}x{cols}")]
    BadMatrixShape {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error("{0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixDto {
    pub rows: usize,
    pub cols: usize,
    /// Row-major [re, im] pairs.
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDto {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixDto {
            rows: m.rows(),
            cols: m.cols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, SchemaError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(SchemaError::BadMatrixShape {
                rows: self.rows,
                cols: self.cols,
                found: self.entries.len(),
            });
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let e = self.entries[i * self.cols + j];
            C64::new(e[0], e[1])
        }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexDto {
    pub schema: String,
    pub dims: Vec<usize>,
    pub diff: Vec<MatrixDto>,
    pub chi: Vec<MatrixDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Vec<MatrixDto>>,
}

impl ComplexDto {
    pub fn from_complex(cx: &GradedChainComplex) -> Self {
        ComplexDto {
            schema: COMPLEX_SCHEMA.to_string(),
            dims: cx.dims.clone(),
            diff: cx.diff.iter().map(MatrixDto::from_matrix).collect(),
            chi: cx.chi.iter().map(MatrixDto::from_matrix).collect(),
            inner: cx
                .inner
                .as_ref()
                .map(|gs| gs.iter().map(MatrixDto::from_matrix).collect()),
        }
    }

    pub fn to_complex(&self) -> Result<GradedChainComplex, SchemaError> {
        if self.schema != COMPLEX_SCHEMA {
            return Err(SchemaError::WrongSchema {
                wanted: COMPLEX_SCHEMA,
                found: self.schema.clone(),
            });
        }
        Ok(GradedChainComplex {
            dims: self.dims.clone(),
            diff: self
                .diff
                .iter()
                .map(|m| m.to_matrix())
                .collect::<Result<_, _>>()?,
            chi: self
                .chi
                .iter()
                .map(|m| m.to_matrix())
                .collect::<Result<_, _>>()?,
            inner: match &self.inner {
                None => None,
                Some(gs) => Some(gs.iter().map(|m| m.to_matrix()).collect::<Result<_, _>>()?),
            },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryModelDto {
    pub schema: String,
    pub dims: Vec<usize>,
    pub diff: Vec<MatrixDto>,
    pub chi: Vec<MatrixDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Vec<MatrixDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<MatrixDto>,
}

impl BoundaryModelDto {
    pub fn from_model(m: &BoundaryModel) -> Self {
        BoundaryModelDto {
            schema: BOUNDARY_MODEL_SCHEMA.to_string(),
            dims: m.dims.clone(),
            diff: m.diff.iter().map(MatrixDto::from_matrix).collect(),
            chi: m.chi.iter().map(MatrixDto::from_matrix).collect(),
            inner: m
                .inner
                .as_ref()
                .map(|gs| gs.iter().map(MatrixDto::from_matrix).collect()),
            lagrangian: m.lagrangian.as_ref().map(MatrixDto::from_matrix),
        }
    }

    pub fn to_model(&self) -> Result<BoundaryModel, SchemaError> {
        if self.schema != BOUNDARY_MODEL_SCHEMA {
            return Err(SchemaError::WrongSchema {
                wanted: BOUNDARY_MODEL_SCHEMA,
                found: self.schema.clone(),
            });
        }
        Ok(BoundaryModel {
            dims: self.dims.clone(),
            diff: self
                .diff
                .iter()
                .map(|m| m.to_matrix())
                .collect::<Result<_, _>>()?,
            chi: self
                .chi
                .iter()
                .map(|m| m.to_matrix())
                .collect::<Result<_, _>>()?,
            inner: match &self.inner {
                None => None,
                Some(gs) => Some(gs.iter().map(|m| m.to_matrix()).collect::<Result<_, _>>()?),
            },
            lagrangian: match &self.lagrangian {
                None => None,
                Some(m) => Some(m.to_matrix()?),
            },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralEntryDto {
    pub value: [f64; 2],
    pub multiplicity: usize,
    pub jordan_blocks: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeSpectrumDto {
    pub minus: Vec<SpectralEntryDto>,
    pub plus: Vec<SpectralEntryDto>,
    pub harmonic_minus: usize,
    pub harmonic_plus: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundarySpectrumDto {
    pub schema: String,
    pub degrees: Vec<DegreeSpectrumDto>,
}

impl BoundarySpectrumDto {
    pub fn from_model(m: &BoundarySpectralModel) -> Self {
        let conv = |e: &SpectralEntry| SpectralEntryDto {
            value: [e.value.re, e.value.im],
            multiplicity: e.multiplicity,
            jordan_blocks: e.jordan_blocks.clone(),
        };
        BoundarySpectrumDto {
            schema: BOUNDARY_SPECTRUM_SCHEMA.to_string(),
            degrees: m
                .degrees
                .iter()
                .map(|d| DegreeSpectrumDto {
                    minus: d.minus.iter().map(conv).collect(),
                    plus: d.plus.iter().map(conv).collect(),
                    harmonic_minus: d.harmonic_minus,
                    harmonic_plus: d.harmonic_plus,
                })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<BoundarySpectralModel, SchemaError> {
        if self.schema != BOUNDARY_SPECTRUM_SCHEMA {
            return Err(SchemaError::WrongSchema {
                wanted: BOUNDARY_SPECTRUM_SCHEMA,
                found: self.schema.clone(),
            });
        }
        let conv = |e: &SpectralEntryDto| -> Result<SpectralEntry, SchemaError> {
            if e.multiplicity == 0 || e.jordan_blocks.iter().sum::<usize>() != e.multiplicity {
                return Err(SchemaError::Malformed(
                    "jordan blocks must be positive and sum to the multiplicity".to_string(),
                ));
            }
            Ok(SpectralEntry {
                value: C64::new(e.value[0], e.value[1]),
                multiplicity: e.multiplicity,
                jordan_blocks: e.jordan_blocks.clone(),
            })
        };
        Ok(BoundarySpectralModel {
            degrees: self
                .degrees
                .iter()
                .map(|d| {
                    Ok(DegreeSpectrum {
                        minus: d.minus.iter().map(conv).collect::<Result<_, _>>()?,
                        plus: d.plus.iter().map(conv).collect::<Result<_, _>>()?,
                        harmonic_minus: d.harmonic_minus,
                        harmonic_plus: d.harmonic_plus,
                    })
                })
                .collect::<Result<_, SchemaError>>()?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryTermDto {
    pub cell: usize,
    pub sign: i32,
    pub transport: MatrixDto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwistedSpecDto {
    pub schema: String,
    pub rank: usize,
    pub cells: Vec<usize>,
    pub in_y: Vec<Vec<bool>>,
    pub boundaries: Vec<Vec<Vec<BoundaryTermDto>>>,
}

impl TwistedSpecDto {
    pub fn from_spec(s: &TwistedComplexSpec) -> Self {
        TwistedSpecDto {
            schema: TWISTED_SCHEMA.to_string(),
            rank: s.rank,
            cells: s.cells.clone(),
            in_y: s.in_y.clone(),
            boundaries: s
                .boundaries
                .iter()
                .map(|per_dim| {
                    per_dim
                        .iter()
                        .map(|terms| {
                            terms
                                .iter()
                                .map(|t| BoundaryTermDto {
                                    cell: t.cell,
                                    sign: t.sign,
                                    transport: MatrixDto::from_matrix(&t.transport),
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_spec(&self) -> Result<TwistedComplexSpec, SchemaError> {
        if self.schema != TWISTED_SCHEMA {
            return Err(SchemaError::WrongSchema {
                wanted: TWISTED_SCHEMA,
                found: self.schema.clone(),
            });
        }
        Ok(TwistedComplexSpec {
            rank: self.rank,
            cells: self.cells.clone(),
            in_y: self.in_y.clone(),
            boundaries: self
                .boundaries
                .iter()
                .map(|per_dim| {
                    per_dim
                        .iter()
                        .map(|terms| {
                            terms
                                .iter()
                                .map(|t| {
                                    Ok(BoundaryTerm {
                                        cell: t.cell,
                                        sign: t.sign,
                                        transport: t.transport.to_matrix()?,
                                    })
                                })
                                .collect::<Result<_, SchemaError>>()
                        })
                        .collect::<Result<_, SchemaError>>()
                })
                .collect::<Result<_, SchemaError>>()?,
        })
    }
}
