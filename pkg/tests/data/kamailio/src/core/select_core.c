/*
 * Header-field accessors used by the select framework.
 */

#include "str.h"
#include "parser/contact/parse_contact.h"

int parse_contact_header(struct hdr_field* _h)
{
	if (_h->parsed) {
		return 0;
	}

	if (parse_contact(_h) < 0) {
		return -1;
	}

	return 0;
}
