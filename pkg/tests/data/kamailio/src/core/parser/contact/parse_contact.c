/*
 * Contact header field parser entry points.
 */

#include "../../str.h"
#include "contact.h"
#include "parse_contact.h"

int contact_parser(char* _s, int _l, contact_body_t* _b)
{
	str body;

	body.s = _s;
	body.len = _l;

	if (parse_contacts(&body, &_b->contacts) < 0) {
		return -1;
	}

	_b->star = 0;
	return 0;
}

int parse_contact(struct hdr_field* _h)
{
	contact_body_t* b;

	if (_h->parsed) {
		return 0;
	}

	b = (contact_body_t*)pkg_malloc(sizeof(contact_body_t));
	if (b == 0) {
		return -1;
	}

	b->star = 0;
	b->contacts = 0;

	if (contact_parser(_h->body.s, _h->body.len, b) < 0) {
		pkg_free(b);
		return -2;
	}

	_h->parsed = (void*)b;
	return 0;
}
