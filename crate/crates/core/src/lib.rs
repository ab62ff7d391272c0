// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

pub mod cli;
pub mod dynamics;
pub mod quadrature;
pub mod rates;
pub mod scenarios;
pub mod spectral;
