use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIM_CAP: usize = 1 << 16;

fn default_cap() -> usize {
    DEFAULT_DIM_CAP
}

fn is_default_cap(cap: &usize) -> bool {
    *cap == DEFAULT_DIM_CAP
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterRole {
    /// Witness register `A`.
    Witness,
    /// Energy readout register `A'` (part of the witness).
    Readout,
    /// Ancilla register `B`, initialised to `|0>`.
    Ancilla,
    /// Control qubit `B'`.
    Control,
    /// Output (flag) qubit measured at the end of a verifier.
    Output,
    /// Clock register `C`.
    Clock,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub role: RegisterRole,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, role: RegisterRole, start: usize, len: usize) -> Self {
        Register { name: name.into(), role, start, len }
    }

    pub fn sites(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Ordered local dimensions plus named registers.
///
/// Basis indices are little-endian: site 0 is the fastest-varying digit, so
/// the digit of site `s` in index `i` is `(i / stride(s)) % dim(s)` with
/// `stride(s)` the product of the dimensions of all sites before `s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout")]
pub struct SystemLayout {
    site_dims: Vec<usize>,
    #[serde(default)]
    registers: Vec<Register>,
    #[serde(default = "default_cap", skip_serializing_if = "is_default_cap")]
    dim_cap: usize,
}

#[derive(Deserialize)]
struct RawLayout {
    site_dims: Vec<usize>,
    #[serde(default)]
    registers: Vec<Register>,
    #[serde(default = "default_cap")]
    dim_cap: usize,
}

impl TryFrom<RawLayout> for SystemLayout {
    type Error = Error;
    fn try_from(raw: RawLayout) -> Result<Self> {
        SystemLayout::with_registers(raw.site_dims, raw.registers, raw.dim_cap)
    }
}

impl SystemLayout {
    pub fn new(site_dims: Vec<usize>) -> Result<Self> {
        Self::with_registers(site_dims, Vec::new(), DEFAULT_DIM_CAP)
    }

    pub fn with_registers(
        site_dims: Vec<usize>,
        registers: Vec<Register>,
        dim_cap: usize,
    ) -> Result<Self> {
        let layout = SystemLayout { site_dims, registers, dim_cap };
        layout.validate()?;
        Ok(layout)
    }

    /// Layout of `n` sites of equal dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let Some(d) = self.site_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidLayout(format!("site dimension {d} < 2")));
        }
        let dim = self
            .site_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::DimensionCap { dim: usize::MAX, cap: self.dim_cap })?;
        if dim > self.dim_cap {
            return Err(Error::DimensionCap { dim, cap: self.dim_cap });
        }
        let mut used = vec![false; self.site_dims.len()];
        for (i, reg) in self.registers.iter().enumerate() {
            if reg.start + reg.len > self.site_dims.len() {
                return Err(Error::InvalidLayout(format!(
                    "register `{}` covers sites {}..{} beyond {} sites",
                    reg.name,
                    reg.start,
                    reg.start + reg.len,
                    self.site_dims.len()
                )));
            }
            if self.registers[..i].iter().any(|r| r.name == reg.name) {
                return Err(Error::InvalidLayout(format!("duplicate register `{}`", reg.name)));
            }
            for s in reg.sites() {
                if used[s] {
                    return Err(Error::InvalidLayout(format!(
                        "register `{}` overlaps another register at site {s}",
                        reg.name
                    )));
                }
                used[s] = true;
            }
        }
        Ok(())
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn num_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    /// Same layout with a different cap; fails if the dimension exceeds it.
    pub fn with_cap(&self, dim_cap: usize) -> Result<Self> {
        let layout = SystemLayout { dim_cap, ..self.clone() };
        layout.validate()?;
        Ok(layout)
    }

    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn registers_with_role(&self, role: RegisterRole) -> impl Iterator<Item = &Register> {
        self.registers.iter().filter(move |r| r.role == role)
    }

    pub fn stride(&self, site: usize) -> usize {
        self.site_dims[..site].iter().product()
    }

    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.stride(site)) % self.site_dims[site]
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        self.site_dims
            .iter()
            .map(|&d| {
                let x = index % d;
                index /= d;
                x
            })
            .collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.site_dims.len());
        digits
            .iter()
            .zip(&self.site_dims)
            .rev()
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// Layout made of the given sites of `self`, in the given order.
    pub fn sublayout(&self, sites: &[usize]) -> Result<SystemLayout> {
        let dims = sites
            .iter()
            .map(|&s| {
                self.site_dims
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::InvalidLayout(format!("site {s} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        SystemLayout::with_registers(dims, Vec::new(), self.dim_cap)
    }

    /// Append sites (and optionally a register covering them).
    pub fn extended(&self, extra_dims: &[usize], register: Option<(&str, RegisterRole)>) -> Result<Self> {
        let start = self.site_dims.len();
        let mut site_dims = self.site_dims.clone();
        site_dims.extend_from_slice(extra_dims);
        let mut registers = self.registers.clone();
        if let Some((name, role)) = register {
            registers.push(Register::new(name, role, start, extra_dims.len()));
        }
        SystemLayout::with_registers(site_dims, registers, self.dim_cap)
    }

    /// Strides of `sites` within this layout, used to scatter a local index.
    pub(crate) fn local_offsets(&self, sites: &[usize]) -> Vec<usize> {
        let strides: Vec<usize> = sites.iter().map(|&s| self.stride(s)).collect();
        let dims: Vec<usize> = sites.iter().map(|&s| self.site_dims[s]).collect();
        let local_dim: usize = dims.iter().product();
        (0..local_dim)
            .map(|mut a| {
                let mut off = 0;
                for (k, &d) in dims.iter().enumerate() {
                    off += (a % d) * strides[k];
                    a /= d;
                }
                off
            })
            .collect()
    }

    /// Base indices of all configurations of the sites *not* in `sites`.
    pub(crate) fn complement_bases(&self, sites: &[usize]) -> Vec<usize> {
        let rest: Vec<usize> = (0..self.num_sites()).filter(|s| !sites.contains(s)).collect();
        self.local_offsets(&rest)
    }
}
