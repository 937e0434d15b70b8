// SPDX-License-Identifier: Apache-2.0

pub mod axi;
pub mod backend;
pub mod charlib;
pub mod config;
pub mod corpus;
pub mod flow;
pub mod frontend;
pub mod hls;
pub mod middle;
pub mod pipeline;
pub mod rtlsim;
pub mod semantics;
