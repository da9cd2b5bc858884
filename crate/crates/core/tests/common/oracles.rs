//! Reference solvers that share no code with the library's optimizers.

use lwa_core::mimo::MimoChannelTensor;

/// Classic sorted active-set waterfilling.
pub fn sorted_waterfill(gains: &[f64], budget: f64, sigma2: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).unwrap());
    let mut level = 0.0;
    let mut active = 0;
    let mut floor_sum = 0.0;
    for (i, &idx) in order.iter().enumerate() {
        let floor = sigma2 / gains[idx];
        let candidate = (budget + floor_sum + floor) / (i + 1) as f64;
        if candidate > floor {
            floor_sum += floor;
            active = i + 1;
            level = candidate;
        } else {
            break;
        }
    }
    let mut p = vec![0.0; gains.len()];
    for &idx in &order[..active] {
        p[idx] = (level - sigma2 / gains[idx]).max(0.0);
    }
    p
}

pub fn rate_sum(gains: &[f64], powers: &[f64], sigma2: f64) -> f64 {
    gains
        .iter()
        .zip(powers)
        .map(|(g, p)| (1.0 + p * g / sigma2).log2())
        .sum()
}

/// Best value of `sum_n log2(1 + p_n g_n / sigma2)` over every point of the
/// simplex `{p_n = budget * i_n / steps, sum i_n <= steps}`.
///
/// Exact enumeration via max-plus convolution: `best[s]` is the best total
/// of the channels seen so far using exactly `s` grid quanta.
pub fn simplex_grid_best(gains: &[f64], budget: f64, sigma2: f64, steps: usize) -> f64 {
    let table = |g: f64| -> Vec<f64> {
        (0..=steps)
            .map(|i| (1.0 + budget * i as f64 / steps as f64 * g / sigma2).log2())
            .collect()
    };
    let mut best = table(gains[0]);
    for &g in &gains[1..] {
        let t = table(g);
        let mut next = vec![f64::NEG_INFINITY; steps + 1];
        for s in 0..=steps {
            for i in 0..=s {
                let v = best[s - i] + t[i];
                if v > next[s] {
                    next[s] = v;
                }
            }
        }
        best = next;
    }
    best.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Pooled eigenchannel power gains, computed from the 2x2 Gram matrices in
/// closed form rather than through the library's SVD.
pub fn pooled_gains_2x2(t: &MimoChannelTensor) -> Vec<f64> {
    let mut out = Vec::new();
    for n in 0..t.dims().0 {
        let h = |i, j| t.entry(n, i, j);
        // G = H H^H
        let g00 = h(0, 0).norm_sqr() + h(0, 1).norm_sqr();
        let g11 = h(1, 0).norm_sqr() + h(1, 1).norm_sqr();
        let g01 = h(0, 0) * h(1, 0).conj() + h(0, 1) * h(1, 1).conj();
        let tr = g00 + g11;
        let det = g00 * g11 - g01.norm_sqr();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        out.push(tr / 2.0 + disc);
        out.push((tr / 2.0 - disc).max(0.0));
    }
    out
}
