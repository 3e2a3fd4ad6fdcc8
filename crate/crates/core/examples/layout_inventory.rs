//! Build the reference trap and list its electrodes, then reload it from text.
use forge::geometry::{load_layout, ReferenceTrap};

fn main() -> forge::Result<()> {
    let trap = ReferenceTrap::default();
    let layout = trap.layout()?;
    for e in &layout.electrodes {
        println!("{:<6} {:?} {} {:>10.0} um2", e.id, e.role, e.layer, e.area());
    }
    let again = load_layout(&layout.to_text())?;
    assert_eq!(again.electrodes.len(), layout.electrodes.len());
    println!("meander stack height {} um", trap.meander.stack_height());
    Ok(())
}
