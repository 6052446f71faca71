// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/fault.hpp"

#include <array>
#include <utility>

namespace robustsim {

Observability observability(FaultKind kind) {
  switch (kind) {
    case FaultKind::nic_crash:
    case FaultKind::port_flapping:
    case FaultKind::switch_down:
    case FaultKind::gpu_driver_hang:
    case FaultKind::gpu_high_temp:
    case FaultKind::gpu_lost:
    case FaultKind::os_kernel_fault:
      return Observability::inspectable;
    case FaultKind::cuda_error:
    case FaultKind::user_code_bug:
    case FaultKind::transient_comm:
    case FaultKind::hdfs_error:
      return Observability::log_visible;
    case FaultKind::nan_loss:
    case FaultKind::fail_slow:
      return Observability::metric_visible;
    case FaultKind::sdc:
    case FaultKind::hang:
      return Observability::silent;
  }
  return Observability::silent;
}

bool stalls_training(FaultKind kind) {
  switch (kind) {
    case FaultKind::nic_crash:
    case FaultKind::port_flapping:
    case FaultKind::switch_down:
    case FaultKind::gpu_driver_hang:
    case FaultKind::gpu_high_temp:
    case FaultKind::gpu_lost:
    case FaultKind::os_kernel_fault:
    case FaultKind::transient_comm:
    case FaultKind::hang:
      return true;
    default:
      return false;
  }
}

bool crashes_job(FaultKind kind) {
  switch (kind) {
    case FaultKind::cuda_error:
    case FaultKind::user_code_bug:
    case FaultKind::hdfs_error:
      return true;
    default:
      return false;
  }
}

std::optional<InspectionItem> inspection_item_of(FaultKind kind) {
  switch (kind) {
    case FaultKind::nic_crash:
      return InspectionItem::nic;
    case FaultKind::port_flapping:
      return InspectionItem::port;
    case FaultKind::switch_down:
      return InspectionItem::switch_fabric;
    case FaultKind::gpu_driver_hang:
      return InspectionItem::gpu_driver;
    case FaultKind::gpu_high_temp:
      return InspectionItem::gpu_temp;
    case FaultKind::gpu_lost:
      return InspectionItem::gpu_lost;
    case FaultKind::os_kernel_fault:
      return InspectionItem::os_kernel;
    default:
      return std::nullopt;
  }
}

bool gpu_test_detects(FaultKind kind) {
  switch (kind) {
    case FaultKind::cuda_error:
    case FaultKind::gpu_lost:
    case FaultKind::gpu_driver_hang:
    case FaultKind::gpu_high_temp:
      return true;
    default:
      return false;
  }
}

bool inter_comm_test_detects(FaultKind kind) {
  switch (kind) {
    case FaultKind::nic_crash:
    case FaultKind::port_flapping:
    case FaultKind::switch_down:
    case FaultKind::transient_comm:
      return true;
    default:
      return false;
  }
}

bool intra_comm_test_detects(FaultKind kind) {
  (void)kind;
  return false;  // no scripted kind maps to intra-machine links today
}

bool replay_reproducible(FaultKind kind) {
  switch (kind) {
    case FaultKind::user_code_bug:
    case FaultKind::nan_loss:
    case FaultKind::hdfs_error:
      return false;
    default:
      return true;
  }
}

namespace {

constexpr std::array<std::pair<FaultKind, const char*>, 15> kFaultNames{{
    {FaultKind::nic_crash, "nic-crash"},
    {FaultKind::port_flapping, "port-flapping"},
    {FaultKind::switch_down, "switch-down"},
    {FaultKind::gpu_driver_hang, "gpu-driver-hang"},
    {FaultKind::gpu_high_temp, "gpu-high-temp"},
    {FaultKind::gpu_lost, "gpu-lost"},
    {FaultKind::os_kernel_fault, "os-kernel-fault"},
    {FaultKind::cuda_error, "cuda-error"},
    {FaultKind::user_code_bug, "user-code-bug"},
    {FaultKind::transient_comm, "transient-comm"},
    {FaultKind::sdc, "sdc"},
    {FaultKind::hang, "hang"},
    {FaultKind::fail_slow, "fail-slow"},
    {FaultKind::nan_loss, "nan-loss"},
    {FaultKind::hdfs_error, "hdfs-error"},
}};

constexpr std::array<std::pair<InspectionItem, const char*>, 10> kItemNames{{
    {InspectionItem::nic, "nic"},
    {InspectionItem::port, "port"},
    {InspectionItem::switch_fabric, "switch"},
    {InspectionItem::gpu_driver, "gpu-driver"},
    {InspectionItem::gpu_temp, "gpu-temp"},
    {InspectionItem::gpu_lost, "gpu-lost"},
    {InspectionItem::os_kernel, "os-kernel"},
    {InspectionItem::pcie_bandwidth, "pcie-bandwidth"},
    {InspectionItem::row_remapping, "row-remapping"},
    {InspectionItem::packet_loss_rate, "packet-loss-rate"},
}};

}  // namespace

const char* fault_kind_name(FaultKind kind) {
  for (const auto& [k, name] : kFaultNames) {
    if (k == kind) {
      return name;
    }
  }
  return "?";
}

std::optional<FaultKind> fault_kind_from_name(const std::string& name) {
  for (const auto& [k, n] : kFaultNames) {
    if (name == n) {
      return k;
    }
  }
  return std::nullopt;
}

const char* inspection_item_name(InspectionItem item) {
  for (const auto& [i, name] : kItemNames) {
    if (i == item) {
      return name;
    }
  }
  return "?";
}

std::optional<InspectionItem> inspection_item_from_name(
    const std::string& name) {
  for (const auto& [i, n] : kItemNames) {
    if (name == n) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace robustsim
