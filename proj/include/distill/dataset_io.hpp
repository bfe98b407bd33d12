#pragma once

#include <string>
#include <tuple>

#include "distill/data.hpp"

namespace distill {

// JSONL problem schema, one record per line:
//   {"id": str, "question": str, "answer": str,
//    "steps": [str]?, "facts": [str]?, "subquestions": [str]?}
// Annotated records add:
//   {"cot": [str]?, "socratic": [{"q": str, "s": str}]?,
//    "source": "gold"|"teacher", "attempts": int}
//
// load_dataset throws ParseError (with line number) on schema violations and
// RegimeError when a record lacks the annotation its regime requires.
Dataset load_dataset(const std::string& path, Regime regime);
void save_dataset(const Dataset& d, const std::string& path);

AnnotatedDataset load_annotated_dataset(const std::string& path, Regime regime);
void save_annotated_dataset(const AnnotatedDataset& d, const std::string& path);

// Contiguous, order-preserving partition. Sizes are floor(train*N),
// floor(validation*N), remainder. No shuffling. Fractions must be positive
// and sum to 1 within 1e-9; empty input is an error.
std::tuple<Dataset, Dataset, Dataset> split_sequential(const Dataset& d, double train_fraction,
                                                       double validation_fraction,
                                                       double test_fraction);

// Stable content fingerprint over ids, texts, and answers; used in manifests.
std::string dataset_fingerprint(const Dataset& d);

} // namespace distill
