use crate::error::{Error, Result};
use crate::specfun::log_binomial;

use super::{Method, SinrMode};

fn direct_cost(n: u64) -> u64 {
    2 * n * n * n + n * n + n
}

/// Successive cost of one candidate of size `n`: one inverse update plus
/// the SINR, `3U^2 + (n - 4)U + 1`.
fn stepwise_cost(n: u64, users: u64) -> u64 {
    3 * users * users + n * users + 1 - 4 * users
}

fn binomial(n: usize, k: usize) -> Result<u64> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for j in 0..k {
        c = c * (n - j) as u128 / (j + 1) as u128;
        if c > u64::MAX as u128 {
            return Err(Error::EnumerationTooLarge {
                combinations: log_binomial(n as u64, k as u64).exp(),
                cap: u64::MAX,
            });
        }
    }
    Ok(c as u64)
}

/// Closed-form multiplication count of `method` on `ports` ports with
/// `n_rf` RF chains and `users` users. The instrumented counters of the
/// strategies reproduce these exactly.
pub fn predicted_mult_count(
    method: Method,
    ports: usize,
    n_rf: usize,
    users: usize,
    mode: SinrMode,
) -> Result<u64> {
    if n_rf == 0 || n_rf > ports || users < 2 {
        return Err(Error::Config(format!(
            "no count for N={ports}, N_RF={n_rf}, U={users}"
        )));
    }
    let (n, r, u) = (ports as u64, n_rf as u64, users as u64);
    let count = match (method, mode) {
        (Method::Ss, _) => 4 * n + direct_cost(r),
        (Method::Eps, SinrMode::Direct) => binomial(ports, n_rf)? * direct_cost(r),
        (Method::Eps, SinrMode::Successive) => {
            binomial(ports, n_rf)? * ((2 * r + 1) * (u * u - u) + r)
        }
        (Method::Ips, mode) => (1..=r)
            .map(|i| {
                (n - i + 1)
                    * match mode {
                        SinrMode::Direct => direct_cost(i),
                        SinrMode::Successive => stepwise_cost(i, u),
                    }
            })
            .sum(),
        (Method::Dps, mode) => (1..=n - r)
            .map(|i| {
                (n - i + 1)
                    * match mode {
                        SinrMode::Direct => direct_cost(n - i),
                        SinrMode::Successive => stepwise_cost(n - i, u),
                    }
            })
            .sum(),
        (Method::External, _) => {
            return Err(Error::Config("external selectors have no closed-form count".into()))
        }
    };
    Ok(count)
}
