// Scratch: predicted and realized Frobenius error for covariance checks.
use cci_core::datagen::{self, GenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() {
    let n = 100_000usize;
    for p in [4usize, 5, 6] {
        let mut rng = ChaCha20Rng::seed_from_u64(808);
        let mut worst_pred: f64 = 0.0;
        let mut worst_real: f64 = 0.0;
        for _ in 0..20 {
            let cfg = GenConfig::new(p, 2.0, true, 0).unwrap();
            let g = datagen::random_dcg(&cfg, &mut rng).unwrap();
            let sigma = datagen::analytic_covariance(&g).unwrap();
            let mut tot = 0.0;
            for a in 0..p {
                for b in 0..p {
                    tot += (sigma[(a, a)] * sigma[(b, b)] + sigma[(a, b)].powi(2)) / n as f64;
                }
            }
            worst_pred = worst_pred.max(tot.sqrt());
            let data = datagen::sample_equilibrium(&g, n, &mut rng).unwrap();
            let mut means = vec![0.0; p];
            for r in 0..n { for c in 0..p { means[c] += data.value(r, c); } }
            for m in &mut means { *m /= n as f64; }
            let mut cov = nalgebra::DMatrix::<f64>::zeros(p, p);
            for r in 0..n {
                for a in 0..p {
                    let da = data.value(r, a) - means[a];
                    for b in a..p { cov[(a, b)] += da * (data.value(r, b) - means[b]); }
                }
            }
            for a in 0..p { for b in a..p { let v = cov[(a,b)] / (n - 1) as f64; cov[(a,b)] = v; cov[(b,a)] = v; } }
            worst_real = worst_real.max((cov - sigma).norm());
        }
        println!("p={p}: worst predicted {worst_pred:.4}, worst realized {worst_real:.4}");
    }
}
