import { ApiClient } from './api.js';
import { initApp } from './app.js';

void initApp(document.getElementById('app') as HTMLElement, new ApiClient());
