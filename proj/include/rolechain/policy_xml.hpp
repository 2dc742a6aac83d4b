// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rolechain
{
  // An SoD policy document:
  //   <SoDPrinciple org="...">
  //     <MERSet type="Static|Dynamic" cardinality="k">
  //       <Role value="..."/>
  //       ...
  //     </MERSet>
  //     ...
  //   </SoDPrinciple>
  struct SodPrincipleDocument
  {
    std::string org;
    std::vector<MerSet> mer_sets;

    bool operator==(const SodPrincipleDocument&) const = default;
  };

  struct SodParseResult
  {
    SodPrincipleDocument document;
    // Non-fatal irregularities, e.g. duplicate roles inside one MERSet
    // (collapsed to a single occurrence).
    std::vector<std::string> warnings;
  };

  // Parses the XML form. Malformed XML throws ParseError(parse_error);
  // well-formed XML that deviates from the schema above throws
  // ParseError(schema_violation). Both carry the 1-based line number and
  // offending element.
  SodParseResult parse_sod_xml(std::string_view text);

  // Canonical serialization: two-space indent, double-quoted attributes,
  // self-closed Role elements, trailing newline.
  std::string serialize_sod_xml(const SodPrincipleDocument& doc);

  // Storage form used in the ledger: a JSON array of MER sets.
  std::vector<MerSet> to_array_form(const SodPrincipleDocument& doc);
  SodPrincipleDocument from_array_form(
    const std::vector<MerSet>& sets, const std::string& org);
}
