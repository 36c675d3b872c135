use lightning_stokes::cases::{case_by_name, CASE_NAMES};
use lightning_stokes::solver::solve_fixed;

fn run(name: &str) {
    let case = case_by_name(name).unwrap();
    let (solution, report) = solve_fixed(&case.domain, &case.basis, &case.solve_options()).unwrap();
    for probe in case.evaluate_probes(&solution, &report).unwrap() {
        assert!(
            probe.passed,
            "{name}: {} = {:e}, reference {:e} ± {:e}",
            probe.name, probe.value, probe.reference, probe.tolerance
        );
    }
}

#[test]
fn lid_driven_cavity_probes_pass() {
    run(CASE_NAMES[0]);
}

#[test]
fn cavity_with_exclusion_probes_pass() {
    run(CASE_NAMES[1]);
}

#[test]
fn triangle_cavity_probes_pass() {
    run(CASE_NAMES[2]);
}

#[test]
fn step_channel_probes_pass() {
    run(CASE_NAMES[3]);
}

#[test]
fn bent_channel_probes_pass() {
    run(CASE_NAMES[4]);
}
