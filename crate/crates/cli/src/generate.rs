use anyhow::Result;

use unirp::synth::{gen_blackwell_pair, generate, Family, GeneratorConfig, GridParams};
use unirp::Instance;

use crate::report::{digest, write_output};
use crate::{FamilyKind, GenerateArgs, Status};

fn config(args: &GenerateArgs) -> GeneratorConfig {
    let grid = GridParams {
        states: args.x,
        observations: args.y,
        actions: args.a,
        grid_size: args.grid,
        cost_scale: args.cost_scale,
    };
    let family = match args.family {
        FamilyKind::Classical => Family::CobbDouglasLinearBudget { goods: args.m },
        FamilyKind::NiacViolation => Family::NiacViolation(grid),
        _ => Family::GarblingGridRational(grid),
    };
    GeneratorConfig {
        seed: args.seed,
        experiments: args.k,
        family,
    }
}

pub fn run(args: &GenerateArgs) -> Result<Status> {
    let inst = match args.family {
        FamilyKind::BlackwellPair => Instance::Blackwell(gen_blackwell_pair(args.x, args.y, args.seed)?),
        _ => generate(&config(args))?,
    };
    let text = inst.to_json();
    write_output(args.out.as_deref(), &text)?;
    let d = digest(text.as_bytes());
    match &args.out {
        Some(path) => println!("{d}  {}", path.display()),
        None => eprintln!("{d}"),
    }
    Ok(Status::Pass)
}
