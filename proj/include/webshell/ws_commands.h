#pragma once

namespace webshell {

class Interp;

/// Register every ws::* extension command on an interpreter: retrieval
/// (ws::getpage, ws::postpage, ws::validate_link, ws::url, ws::stream,
/// ws::urlconn), parsing (ws::parser, ws::parse, ws::dump), tag-tree access
/// and surgery (ws::tag, ws::node, ws::parent, ws::child, ws::sibling,
/// ws::cut, ws::copy, ws::paste, ws::move), structural iterators
/// (ws::iterator, ws::iterate), tasks (ws::thread, ws::timeout) and the
/// applications (ws::webgrep, ws::annotate_links, ws::webcopy).
void register_ws_commands(Interp& interp);

} // namespace webshell
