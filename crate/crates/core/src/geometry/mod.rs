//! Convex bodies, polytopes, cylinders and their lattice discretizations.

pub mod body;
pub mod discretize;
pub mod polytope;
pub mod vec;

pub use body::ConvexBody;
pub use discretize::{discretize_body, discretize_cylinder, edge_boundary, Cylinder, CylinderSets, DiscretizeMode};
pub use polytope::{direction_set, inner_polytope, outer_polytope, wulff_crystal, ConvexPolytope, Face, Halfspace};
pub use vec::V;
