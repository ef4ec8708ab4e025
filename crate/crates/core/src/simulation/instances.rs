//! Seeded simulations with a known answer, for sweeps and regression runs.

use faer::Mat;
use rand::Rng;

use super::Encoding;
use crate::error::{Error, Result};
use crate::operators::linalg::{self, re};
use crate::operators::{random, DenseOperator, RegisterRole, SystemLayout};

#[derive(Clone, Debug)]
pub struct BlockInstance {
    pub h: DenseOperator,
    pub hp: DenseOperator,
    pub encoding: Encoding,
    pub delta: f64,
    /// `U` with `H' = U H'_0 U^dagger`; identity for exact instances.
    pub rotation: linalg::CMat,
}

/// `H` on `n` qubits with `||H|| = delta / 4`, simulated inside `H'_0 =
/// H (+) [conj(H)] (+) (D + 2 delta)` on the target plus one ancilla of
/// dimension `ancilla` (`||D|| = delta / 2`). With `conjugated` the second
/// ancilla level carries `conj(H)` through `Q`. `H' = U H'_0 U^dagger` for a
/// random `U` within `s` of the identity.
pub fn block_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    ancilla: usize,
    conjugated: bool,
    delta: f64,
    s: f64,
) -> Result<BlockInstance> {
    let used = 1 + conjugated as usize;
    if ancilla <= used {
        return Err(Error::InvalidParameter(format!("ancilla dimension {ancilla} leaves no room above the cut")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let target = SystemLayout::uniform(n, 2)?;
    let d = target.total_dim();
    let sim = target.extended(&[ancilla], Some(("anc", RegisterRole::Ancilla)))?;
    let big = sim.total_dim();

    let h = random::hermitian(rng, target, delta / 4.0);
    let pad_layout = SystemLayout::with_registers(vec![big - used * d], Vec::new(), usize::MAX)?;
    let pad = random::hermitian(rng, pad_layout, delta / 2.0);
    let he = h.entries();
    let pe = pad.entries();
    let h0 = Mat::from_fn(big, big, |i, j| {
        let (bi, bj) = (i / d, j / d);
        match (bi < used, bj < used) {
            (true, true) if bi == bj => {
                let z = he[(i % d, j % d)];
                if bi == 1 { z.conj() } else { z }
            }
            (false, false) => {
                let z = pe[(i - used * d, j - used * d)];
                if i == j { z + re(2.0 * delta) } else { z }
            }
            _ => re(0.0),
        }
    });
    let rotation = if s > 0.0 { random::near_identity_unitary(rng, big, s) } else { linalg::identity(big) };
    let rotated = linalg::mul_adj(linalg::matmul(rotation.as_ref(), h0.as_ref()).as_ref(), rotation.as_ref());
    let hp = DenseOperator::hermitian(sim.clone(), linalg::hermitian_part(rotated.as_ref()))?;

    let v = Mat::from_fn(big, used * d, |i, j| re((i == j) as u8 as f64));
    let p = Mat::from_fn(used, used, |i, j| re((i == 0 && j == 0) as u8 as f64));
    let q = Mat::from_fn(used, used, |i, j| re((i == 1 && j == 1) as u8 as f64));
    let encoding = Encoding::new(sim, d, v, p, q)?;
    Ok(BlockInstance { h, hp, encoding, delta, rotation })
}
