use cytowave_core::analysis::{sweep_frequency, DetectSettings, SweepSetup, TrendCal};
use cytowave_core::dielectrics::{MaterialTable, Medium};
use cytowave_core::electrodes::{ElectrodeGeometry, GeometryKind};
use cytowave_core::receiver::ReceiverConfig;
use cytowave_core::transit::FlowConditions;

fn main() {
    let table = MaterialTable::builtin();
    let medium = Medium::water();
    let flow = FlowConditions::new(1.6666666666666667e-10, 1e11, 1.0).unwrap();
    let freqs = [1e7, 1e8, 1e9, 1e10];
    for (kind, geom) in [
        (
            GeometryKind::ParallelPlates,
            ElectrodeGeometry::parallel_plates(45e-6, 10e-6).unwrap(),
        ),
        (
            GeometryKind::Interdigitated,
            ElectrodeGeometry::interdigitated(15e-6, 15e-6, 3).unwrap(),
        ),
        (
            GeometryKind::DiskRing,
            ElectrodeGeometry::disk_ring(75e-6, 75e-6).unwrap(),
        ),
    ] {
        let setup = SweepSetup {
            geom: &geom,
            radius_m: 5e-6,
            height_m: 20e-6,
            velocity_m_s: 0.5,
            particle_eps_at: |f| table.permittivity("polystyrene", f),
            medium: &medium,
            flow: &flow,
            duration_s: 1.2,
            chain: ReceiverConfig::desk_scale(),
            cal: TrendCal::for_kind(kind),
            detect: DetectSettings::default(),
        };
        let t0 = std::time::Instant::now();
        let result = sweep_frequency(&setup, &freqs, 42).unwrap();
        println!("{kind} ({:.2?})", t0.elapsed());
        print!("{}", result.to_csv());
    }
}
