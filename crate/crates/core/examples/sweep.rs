//! Grid sweep through the scan layer, written the same way the `qest` binary does.

use qest::output::{write_atomic, Format};
use qest::scan::{qfi_table, tradeoff_table, Method, PovmChoice, ScanSpec};

fn main() -> qest::Result<()> {
    let mut spec = ScanSpec::new(vec![5, 10, 25], vec![0.8, 1.0, 1.2]);
    spec.method = Method::Large;
    print!("{}", qfi_table(&spec)?.render(Format::Csv));

    spec.method = Method::Exact;
    let t = tradeoff_table(&spec, &PovmChoice::LargeOptimal)?;
    let path = std::env::temp_dir().join("qest-sweep.json");
    write_atomic(&path, t.render(Format::Json).as_bytes())?;
    println!("trade-off table written to {}", path.display());
    Ok(())
}
