#pragma once

#include <string>
#include <string_view>

#include "core/types.hpp"

namespace hwenergy::ingest {

enum class DatasetFormat { Auto, Csv, Json };

// Column order of the CSV form. The trailing *_repeats/*_confident columns
// are optional on input (defaults: 1 repeat, not confident).
inline constexpr std::string_view kDatasetCsvHeader =
    "id,codec,decoder_name,decoder_kind,sequence,class,qp,condition,t_dec_sw,"
    "perf_instructions,perf_cycles,perf_user_time,ir,dr,dw,i1mr,d1mr,d1mw,ilmr,dlmr,dlmw,"
    "bc,bcm,bi,bim,energy_sw_j,energy_hw_j,energy_sw_repeats,energy_sw_confident,"
    "energy_hw_repeats,energy_hw_confident";

// Errors: DuplicateId, SchemaViolation (unknown enum value, missing column),
// RowParseError (with the source line number), InvariantViolation.
Dataset load_dataset(std::string_view document, DatasetFormat format = DatasetFormat::Auto);
Dataset load_dataset_file(const std::string& path);

std::string write_dataset_csv(const Dataset& dataset);
std::string write_dataset_json(const Dataset& dataset);

// Chooses CSV or JSON from the extension (.json -> JSON).
void save_dataset_file(const Dataset& dataset, const std::string& path);

}  // namespace hwenergy::ingest
