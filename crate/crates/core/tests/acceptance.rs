//! Acceptance sweep: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use ncscatter::charfn::{verify_coincidence, verify_w_restriction};
use ncscatter::intertwiner::Intertwiner;
use ncscatter::lifting::{generate, LiftingInstance, DEFAULT_A_SCALE};
use ncscatter::ncsystem::verify_io_suite;
use ncscatter::numkernel::{hermitian_sqrt, operator_norm, ComplexMatrix};
use ncscatter::report::{Check, Report};
use ncscatter::scattering::verify_scattering;
use ncscatter::suite::{dilation_checks, verify_all, verify_coisometry, verify_intertwining};
use ncscatter::transfer::{build_colligation, verify_contraction, verify_multi_analytic, verify_structure};

struct Case {
    d: usize,
    dim_c: usize,
    dim_a: usize,
    seed: u64,
    depth: usize,
}

/// 20 instances with d ∈ {2, 3}, dims ≤ 3. A generic `A` needs `dimA ≤ (d-1)·dimC`.
fn sweep() -> Vec<Case> {
    (0..20u64)
        .map(|seed| {
            let d = 2 + (seed % 2) as usize;
            let dim_c = 1 + (seed / 2 % 3) as usize;
            let dim_a = if seed == 0 { 0 } else { (1 + seed as usize / 6).min(3).min((d - 1) * dim_c) };
            let depth = if d == 2 { 4 } else { 3 };
            Case { d, dim_c, dim_a, seed: 1000 + seed, depth }
        })
        .collect()
}

#[derive(Default)]
struct Criterion {
    worst: BTreeMap<String, (f64, f64, bool)>,
}

impl Criterion {
    fn add(&mut self, c: Check) {
        // Exact dimension checks carry their counts in the name.
        let name = c.check.split(" (expected").next().unwrap().to_string();
        let e = self.worst.entry(name).or_insert((0.0, c.threshold, true));
        e.0 = if c.max_violation.is_nan() { f64::NAN } else { e.0.max(c.max_violation) };
        e.2 &= c.pass;
    }

    fn add_all(&mut self, r: Report) {
        r.checks.into_iter().for_each(|c| self.add(c));
    }

    fn pass(&self) -> bool {
        !self.worst.is_empty() && self.worst.values().all(|v| v.2)
    }
}

/// Lifting identities recomputed from the blocks.
fn lifting_oracle(inst: &LiftingInstance) -> Vec<Check> {
    let id = ComplexMatrix::identity;
    let mut ee = ComplexMatrix::zeros(inst.dim_e(), inst.dim_e());
    let mut cb = ComplexMatrix::zeros(inst.dim_c, inst.dim_a);
    let mut bb = ComplexMatrix::zeros(inst.dim_a, inst.dim_a);
    let mut aa = ComplexMatrix::zeros(inst.dim_a, inst.dim_a);
    for j in 1..=inst.d {
        let (e, c, a, b) = (inst.e.op(j), inst.c.op(j), inst.a.op(j), &inst.b[j - 1]);
        ee = ee.add(&e.matmul(&e.adjoint()));
        cb = cb.add(&c.matmul(&b.adjoint()));
        bb = bb.add(&b.matmul(&b.adjoint()));
        aa = aa.add(&a.matmul(&a.adjoint()));
    }
    let d_star = hermitian_sqrt(&id(inst.dim_a).sub(&aa), 1e-12).expect("I - AA* ≥ 0");
    // γ maps into 𝒟_C, given in the frame of the defect basis of C.
    let b_star = inst.b_star();
    let g = inst.defect_c.basis.matmul(&inst.gamma);
    let factor = g.matmul(&inst.dstar_basis.adjoint()).matmul(&d_star);
    vec![
        Check::new("ΣE_jE_j* = I", operator_norm(&ee.sub(&id(inst.dim_e()))), 1e-8),
        Check::new("ΣC_jB_j* = 0", operator_norm(&cb), 1e-8),
        Check::new("BB* = I - AA*", operator_norm(&bb.sub(&id(inst.dim_a).sub(&aa))), 1e-8),
        Check::new("γ isometric", operator_norm(&inst.gamma.adjoint().matmul(&inst.gamma).sub(&id(inst.gamma.cols()))), 1e-8),
        Check::new("γD_*,A = B*", operator_norm(&factor.sub(&b_star)), 1e-8),
    ]
}

fn main() -> ExitCode {
    let mut crit: Vec<Criterion> = (0..11).map(|_| Criterion::default()).collect();
    let started = Instant::now();
    for case in sweep() {
        let t0 = Instant::now();
        let inst = generate(case.d, case.dim_c, case.dim_a, case.seed, DEFAULT_A_SCALE).expect("feasible sweep instance");
        crit[1].add(Check::new("generation time (s)", t0.elapsed().as_secs_f64(), 0.1));
        lifting_oracle(&inst).into_iter().for_each(|c| crit[1].add(c));

        let n = case.depth;
        let it = Intertwiner::new(&inst);
        for (dil, label) in [(&it.c, "C"), (&it.e, "E")] {
            crit[2].add_all(dilation_checks(dil, n, &format!("V^{label}"), true).unwrap());
        }
        crit[3].add_all(verify_coisometry(&inst, n).unwrap());
        crit[4].add_all(verify_intertwining(&inst, n).unwrap());
        crit[5].add_all(verify_scattering(&inst, n).unwrap());
        crit[6].add_all(verify_contraction(&inst, n));
        crit[7].add_all(verify_io_suite(&inst, n).unwrap());
        crit[7].add_all(verify_multi_analytic(&inst, n).unwrap());
        crit[8].add_all(verify_coincidence(&inst, n).unwrap());
        crit[9].add_all(verify_w_restriction(&inst, n).unwrap());
        crit[10].add_all(verify_structure(&inst));
        for c in build_colligation(&inst).checks(1e-10) {
            crit[10].add(c);
        }
    }
    let sweep_time = started.elapsed().as_secs_f64();

    let inst = generate(2, 2, 2, 2024, DEFAULT_A_SCALE).unwrap();
    let t0 = Instant::now();
    let full = verify_all(&inst, 4).unwrap();
    let full_time = t0.elapsed().as_secs_f64();
    let mut timing = Criterion::default();
    timing.add(Check::new("full verify d=2 (2,2) N=4 (s)", full_time, 10.0));
    timing.add(Check::new("full verify d=2 (2,2) N=4 all checks", if full.all_pass() { 0.0 } else { 1.0 }, 0.0));

    let titles = [
        "",
        "lifting validity",
        "dilation contract",
        "intertwiner coisometry and stabilization",
        "intertwining of the dilations",
        "outgoing Cuntz scattering",
        "transfer function contractive",
        "input-output and multi-analyticity",
        "characteristic function coincidence",
        "W restricted to the defect space",
        "structural identities",
    ];
    let mut ok = true;
    println!("acceptance sweep: 20 instances in {sweep_time:.2} s");
    for (k, c) in crit.iter().enumerate().skip(1) {
        print_line(&k.to_string(), titles[k], c);
        ok &= c.pass();
    }
    print_line("T", "runtime", &timing);
    ok &= timing.pass();
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn print_line(id: &str, title: &str, c: &Criterion) {
    let tag = if c.pass() { "PASS" } else { "FAIL" };
    let parts: Vec<String> = c
        .worst
        .iter()
        .map(|(name, (v, t, p))| format!("{}{name} {v:.1e}/{t:.0e}", if *p { "" } else { "!" }))
        .collect();
    println!("[{tag}] criterion {id} {title}: {}", parts.join("; "));
}
