//! Bundled figure-reproduction configs.

pub struct Entry {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

macro_rules! entry {
    ($name:literal, $desc:literal) => {
        Entry { name: $name, description: $desc, text: include_str!(concat!("../configs/", $name, ".toml")) }
    };
}

pub const CATALOG: &[Entry] = &[
    entry!("fig1", "Ohmic rate γ(ω) and Lamb shift S(ω) at 1/β = 2.23 GHz, ω_c = 8π GHz"),
    entry!("fig2a", "closed single-qubit anneal, t_f ω_x = 10√2"),
    entry!("fig2b", "weak-coupling anneal, t_f ω_x = 10√2"),
    entry!("fig2c", "weak-coupling anneal, t_f ω_x = 5·10³"),
    entry!("fig2d", "weak-coupling anneal, t_f ω_x = 5·10⁴"),
    entry!("fig3", "final ground-state population vs t_f in the weak-coupling limit"),
    entry!("fig4", "optimal t_f vs system-bath coupling"),
    entry!("fig5a", "singular-coupling anneal, t_f ω_x = 10²"),
    entry!("fig5b", "singular-coupling anneal, t_f ω_x = 10³"),
    entry!("fig5c", "singular-coupling anneal, t_f ω_x = 10⁴"),
    entry!("fig6", "ground-state error vs boundary-cancellation order k"),
    entry!("fig7", "gap profiles for boundary-cancellation schedules"),
    entry!("fig8", "ground manifold of the 8-spin quantum-signature instance"),
    entry!("fig9a", "SQA with bath: P_I/P_C vs α, 100 sweeps"),
    entry!("fig9b", "SQA with bath: P_I/P_C vs α, 200 sweeps"),
    entry!("fig9c", "SQA with bath: P_I/P_C vs α, 500 sweeps"),
    entry!("rates", "pairwise dephasing and depopulation rates of a 3-qubit instance"),
];

pub fn find(name: &str) -> Option<&'static Entry> {
    CATALOG.iter().find(|e| e.name == name)
}
