pub mod alg1;
pub mod alg2;
pub mod base;
pub mod experiment;
pub mod ft_blocks;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod spanner;
pub mod union;
