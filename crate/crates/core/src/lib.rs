pub mod chiral_potts;
pub mod painleve;
pub mod quasiparticle;
pub mod special_functions;
