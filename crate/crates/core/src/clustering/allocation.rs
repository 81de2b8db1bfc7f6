//! Splitting a cluster budget across groups in proportion to their sizes.

use crate::error::{Error, Result};

/// Distributes `k_total` clusters over groups of the given sizes.
///
/// Each group starts at its rounded quota `k_total * n_i / N` (halves round
/// up), clamped to `[1, n_i]`. Seats are then added to the groups whose
/// quota most exceeds their allocation, or taken from the groups whose
/// allocation most exceeds their quota, until the total is met. Ties go to
/// the lower group index when adding and the higher one when removing. The
/// result minimizes the squared deviation from the quotas.
pub fn allocate(sizes: &[usize], k_total: usize) -> Result<Vec<usize>> {
    let n: usize = sizes.iter().sum();
    let groups = sizes.iter().filter(|&&s| s > 0).count();
    if k_total < groups || k_total > n || k_total == 0 {
        return Err(Error::InvalidK { k: k_total, n });
    }
    let (kt, nt) = (k_total as i128, n as i128);
    // quota excess of group i, scaled by N: k_total * n_i - N * k_i
    let gap = |i: usize, k_i: usize| kt * sizes[i] as i128 - nt * k_i as i128;

    let mut k: Vec<usize> = sizes
        .iter()
        .map(|&s| {
            if s == 0 {
                return 0;
            }
            let rounded = (2 * kt * s as i128 + nt) / (2 * nt);
            (rounded as usize).clamp(1, s)
        })
        .collect();

    let mut assigned: usize = k.iter().sum();
    while assigned < k_total {
        let i = (0..sizes.len())
            .filter(|&i| k[i] < sizes[i])
            .max_by(|&a, &b| gap(a, k[a]).cmp(&gap(b, k[b])).then(b.cmp(&a)))
            .expect("k_total <= N leaves room");
        k[i] += 1;
        assigned += 1;
    }
    while assigned > k_total {
        let i = (0..sizes.len())
            .filter(|&i| k[i] > 1)
            .min_by(|&a, &b| gap(a, k[a]).cmp(&gap(b, k[b])).then(b.cmp(&a)))
            .expect("k_total >= groups leaves a removable seat");
        k[i] -= 1;
        assigned -= 1;
    }
    Ok(k)
}
