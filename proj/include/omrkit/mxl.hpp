#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace omrkit::mxl {

// Ordered labeled tree over a MusicXML document. Attributes are folded into
// the label as "tag@k1=v1@k2=v2" with keys sorted; a text-bearing leaf gets
// "=text" appended ("step=C").
struct LabeledTree {
    std::string label;
    std::vector<LabeledTree> children;
    // Provenance: set on roots returned by flatten_notes. Not part of
    // structural equality.
    bool flattened = false;

    bool operator==(const LabeledTree& o) const {
        return label == o.label && children == o.children;
    }
};

// Tag part of a folded label: everything before the first '@' or '='.
std::string_view label_tag(const std::string& label);

// Parse MusicXML bytes (a compressed .mxl container is unwrapped first).
// Throws XmlSyntaxError on malformed XML, NotMusicXml when the root element
// is neither score-partwise nor score-timewise.
LabeledTree parse_musicxml(const std::string& bytes);

// Replace every <note> subtree by a single leaf whose label joins the
// subtree's labels in document order.
LabeledTree flatten_notes(const LabeledTree& t);

// Keep the first max_nodes nodes in pre-order; the result is ancestor-closed.
LabeledTree truncate(const LabeledTree& t, std::size_t max_nodes);

std::size_t node_count(const LabeledTree& t);

// Serialize back to XML. Intended for trees built by the converter (labels
// following the folding convention above, attributes and text never mixed on
// one element).
std::string serialize_musicxml(const LabeledTree& t);

// Compressed-container support, exposed for tests.
bool looks_like_zip(const std::string& bytes);
// Extract the main MusicXML document from a .mxl zip container, following
// META-INF/container.xml when present, else the first top-level XML member.
std::string mxl_main_document(const std::string& bytes);

} // namespace omrkit::mxl
