#ifndef CONTACT_H
#define CONTACT_H

#define MAX_CONTACTS 16

typedef struct contact {
	const char* start;
	int len;
} contact_t;

int parse_contacts(char* buf, int len);

#endif
