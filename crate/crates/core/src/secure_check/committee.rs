use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sharing::Mpc;

/// Validators assigned to each client: `members[i]` holds the
/// `2*m_c + 1` distinct clients whose validation data scores client `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckCommittee {
    pub members: Vec<Vec<usize>>,
}

impl CheckCommittee {
    pub fn size(m_c: usize) -> usize {
        2 * m_c + 1
    }

    pub fn clients(&self) -> usize {
        self.members.len()
    }
}

/// Uniform sampling without replacement from the other `m - 1` clients.
pub fn sample_committees_with<R: Rng + ?Sized>(m: usize, m_c: usize, rng: &mut R) -> Result<CheckCommittee> {
    let size = CheckCommittee::size(m_c);
    if m == 0 || size > m - 1 {
        return Err(Error::PopulationTooSmall {
            clients: m,
            committee: size,
        });
    }
    let members = (0..m)
        .map(|owner| {
            let mut ids: Vec<usize> = index::sample(rng, m - 1, size)
                .into_iter()
                .map(|k| if k < owner { k } else { k + 1 })
                .collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    Ok(CheckCommittee { members })
}

/// Committees drawn from the parties' common key.
pub fn sample_committees(mpc: &mut Mpc, m: usize, m_c: usize) -> Result<CheckCommittee> {
    let mut rng = mpc.common_rng("committee");
    sample_committees_with(m, m_c, &mut rng)
}
