#pragma once

#include <iosfwd>
#include <string>

#include "bivicap/data.hpp"
#include "bivicap/loss.hpp"
#include "bivicap/model.hpp"

namespace bivicap {

/// Everything needed to caption with a trained model.
struct TrainedModel {
  ModelParams params;
  Vocabulary vocab;
  CellVariant variant = CellVariant::paper;
  InitStateMode init_state = InitStateMode::mean;
  int stride = 26;

  ForwardOptions forward_options() const { return {variant, init_state}; }
};

// Container layout: magic "BVCK", version u32, tensor count u32, then per
// tensor {name_len u32, name bytes, rank u32, dims u32×rank, f64 LE data};
// a length-prefixed UTF-8 JSON metadata block (hyperparameters, vocabulary,
// cell variant, stride) follows. All integers little-endian.

void save_checkpoint(std::ostream& out, const TrainedModel& model);
void save_checkpoint(const std::string& path, const TrainedModel& model);
TrainedModel load_checkpoint(std::istream& in, const std::string& what = "<stream>");
TrainedModel load_checkpoint(const std::string& path);

std::string checkpoint_bytes(const TrainedModel& model);

const char* to_string(CellVariant v);
CellVariant cell_variant_from_string(const std::string& s);
const char* to_string(InitStateMode m);
InitStateMode init_state_from_string(const std::string& s);

}  // namespace bivicap
