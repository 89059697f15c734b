use fhg_core::adversaries::{gen_instance, gen_random, gen_random_tree_domain, StarKind};
use fhg_core::io::symmetric_to_json;

use super::{star_spec, weight_range};
use crate::args::{GenArgs, GenKind, StarArgs};
use crate::config::Settings;
use crate::error::CliResult;
use crate::output::{emit, to_json};

pub fn run(a: GenArgs, settings: &Settings) -> CliResult<()> {
    match a.kind {
        GenKind::Random(r) => {
            let range = weight_range(r.range.as_deref(), "-10:10:4")?;
            let g = gen_random(r.n, settings.seed_or(r.seed), &range);
            emit(r.out.as_deref(), &symmetric_to_json(&g))
        }
        GenKind::Tree(r) => {
            let range = weight_range(r.range.as_deref(), "1:10:4")?;
            let g = gen_random_tree_domain(r.n, settings.seed_or(r.seed), &range)?;
            emit(r.out.as_deref(), &symmetric_to_json(&g))
        }
        GenKind::Star(s) => star(StarKind::Star, s),
        GenKind::Bistar(s) => star(StarKind::Bistar, s),
    }
}

fn star(kind: StarKind, s: StarArgs) -> CliResult<()> {
    let spec = star_spec(&s.shape)?;
    if s.spec {
        return emit(s.out.as_deref(), &to_json(&spec.to_file(kind)));
    }
    let g = gen_instance(kind, &spec)?;
    emit(s.out.as_deref(), &symmetric_to_json(&g))
}
