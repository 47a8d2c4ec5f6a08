pub mod channels;
pub mod cli;
pub mod extremality;
pub mod numkernel;
pub mod optimizer;
pub mod povm;
pub mod reps;
