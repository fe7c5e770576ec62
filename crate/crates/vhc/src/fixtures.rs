//! Bundled model files.

use crate::model::Model;

pub struct Fixture {
    pub name: &'static str,
    pub text: &'static str,
}

impl Fixture {
    pub fn model(&self) -> Model {
        Model::parse(self.text).expect("bundled fixtures are valid")
    }
}

macro_rules! fixtures {
    ($($id:ident => $name:literal),* $(,)?) => {
        $(pub const $id: Fixture = Fixture { name: $name, text: include_str!(concat!("../models/", $name, ".toml")) };)*
        pub const ALL: &[Fixture] = &[$($id),*];
    };
}

fixtures! {
    EXAMPLE_1 => "example1",
    EXAMPLE_2 => "example2",
    EXAMPLE_3 => "example3",
    EXAMPLE_4 => "example4",
    PARTICLE_1 => "particle1",
    PARTICLE_2 => "particle2",
    PARTICLE_3 => "particle3",
    PARTICLE_4 => "particle4",
}

pub fn by_name(name: &str) -> Option<&'static Fixture> {
    ALL.iter().find(|f| f.name == name)
}
