//! The resource agents' energy/time trade. Machines whose uptime is below
//! the threshold buy speed with energy (one minute faster costs 5 % more
//! energy per step); if the fleet then exceeds the energy budget, busy
//! machines give some speed back (one minute slower saves 5 %).
//!
//! With uptimes 0.48/0.60/0.80/0.70 and efficiencies 0.95/0.93/0.80/0.85
//! M1 ends up at 18 min / 110.25 kWh and M3 at 16 min / 114 kWh, for a
//! fleet total of 449.25 kWh under the 450 kWh budget.
//!
//! ```bash
//! cargo run --example policy_adjust
//! ```

use ontomas::builder::{build_abox, parse_csv_bundle, read_bundle_dir};
use ontomas::kb::KnowledgeBase;
use ontomas::sim::{fleet_energy, machine_performances, ra_adjust, Observation, RaPolicyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/case_study");
    let mut kb = KnowledgeBase::new();
    build_abox(&mut kb, &parse_csv_bundle(&read_bundle_dir(&dir)?)?)?;
    let policy = RaPolicyConfig::default();
    println!("policy: {policy:?}\n");

    let show = |kb: &KnowledgeBase, title: &str| -> Result<(), Box<dyn std::error::Error>> {
        let perfs = machine_performances(kb, "P1")?;
        println!("{title}");
        for p in &perfs {
            println!(
                "  {} {:>3} min {:>7} kWh",
                p.machine,
                p.expected.duration_min(),
                p.expected.energy_kwh()
            );
        }
        println!("  fleet {} kWh\n", fleet_energy(perfs.iter().map(|p| &p.expected)));
        Ok(())
    };
    show(&kb, "before")?;

    let observed = [
        ("M1", "0.48", "0.95"),
        ("M2", "0.60", "0.93"),
        ("M3", "0.80", "0.80"),
        ("M4", "0.70", "0.85"),
    ];
    let obs: Vec<Observation> = observed
        .iter()
        .map(|(m, u, e)| Observation {
            machine: m.to_string(),
            uptime: u.parse().unwrap(),
            perf_efficiency: e.parse().unwrap(),
        })
        .collect();

    for a in ra_adjust(&mut kb, &policy, "P1", &obs)? {
        println!(
            "{} {}: {:+} min, energy x{} ({} -> {} kWh)",
            a.machine,
            a.plan,
            a.duration_delta,
            a.energy_factor,
            a.before.energy_kwh(),
            a.after.energy_kwh()
        );
    }
    println!();
    show(&kb, "after")?;
    Ok(())
}
