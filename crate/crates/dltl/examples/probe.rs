use std::time::Instant;
use dltl::machine::Compiler;
use dltl::rational::rat;
use dltl::trace::Alphabet;
use dltl::Prop;

fn main() {
    for denom in [3i64, 10, 20, 50, 100] {
        let lambda = rat(denom - 1, denom);
        let ab = Alphabet::new([Prop::new("p").unwrap()]).unwrap();
        let c = Compiler { state_budget: 2_000_000, ..Compiler::default() };
        let t0 = Instant::now();
        let atom = c.atomic(&Prop::new("p").unwrap(), &lambda, &ab).unwrap();
        let notp = c.negation(&atom);
        let ev = c.eventually(&notp).unwrap();
        println!("lambda={}: F !p states = {} in {:?}", lambda, ev.num_states(), t0.elapsed());
    }
}
