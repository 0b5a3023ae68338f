use chaplab::charmap::*;
use chaplab::initial_data::*;
use chaplab::weakform::*;
use chaplab::singularity::analyze;

fn main() {
    let sc = builtin_scenario("cusp-tanh").unwrap();
    let mut map = CharMap::new(sc.data.clone(), sc.interval);
    let reports = analyze(&sc, &map).unwrap();
    let t0 = reports[0].blowup.t;
    map.set_lifespan(Some(t0));
    let phi = TestFunction::new(PhysCoord::new(0.45 * t0, 1.2), 0.3 * t0);
    let data = map.data();
    let mu = data.mu;
    let rect_t = (0.2306190629455086f64, 1.1530953147275428f64);
    let rect_x = (0.7387619258182051f64, 1.6612380741817948f64);

    let brute_inner = |alpha: f64, n: usize| -> f64 {
        let (blo, bhi) = (alpha.max(-4.0), 6.0f64);
        let h = (bhi - blo) / n as f64;
        let mut s = 0.0;
        for k in 0..n {
            let beta = blo + h * (k as f64 + 0.5);
            let q = map.map_fast(CharCoord::new(alpha, beta));
            if q.t < rect_t.0 || q.t > rect_t.1 || q.x < rect_x.0 || q.x > rect_x.1 { continue; }
            let pt = phi.dt(q.t, q.x);
            let px = phi.dx(q.t, q.x);
            let denom = data.gap(alpha) * data.gap(beta);
            let lsum = data.lambda_plus.value(beta) + data.lambda_minus.value(alpha);
            s += (2.0 * mu * pt + mu * lsum * px) / denom * h;
        }
        s
    };
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let n = 400;
    for i in 0..=n {
        let alpha = -0.05 + 1.85 * i as f64 / n as f64;
        let v = debug_inner_mass(&map, &phi, alpha, 5e-12);
        let vb = brute_inner(alpha, 6000);
        let d = (v - vb).abs();
        if d > worst.0 {
            worst = (d, alpha, v, vb);
        }
    }
    println!("worst diff {:.3e} at alpha={:.6}: machinery={:+.8e} brute={:+.8e}", worst.0, worst.1, worst.2, worst.3);
}
